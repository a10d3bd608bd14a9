//! Independent reference computations used to test the exact engine.
//!
//! Nothing here shares code with the character or Verlinde paths beyond the
//! root datum tables.

use std::collections::HashSet;

use astro_float::{BigFloat, Consts, RoundingMode};

use crate::root_datum::{Family, LieType, RootDatum};

/// Working precision of the sine-sum oracle, in bits. Terms reach `10^8`
/// with heavy cancellation, more than `f64` can carry to `10^{-6}`.
const SINE_PRECISION: usize = 192;

/// `SU(2)` index at level `k`, genus `h`, markings `mus`, from the modular
/// `S`-matrix `S_{ab} = sqrt(2/(k+2)) sin(pi (a+1)(b+1)/(k+2))`:
/// `sum_b S_{0b}^{2-2h-r} prod_j S_{mu_j b}`, summed in multiprecision floats.
pub fn su2_sine_sum(k: u32, h: u32, mus: &[u32]) -> f64 {
    let p = SINE_PRECISION;
    let rm = RoundingMode::ToEven;
    let mut cc = Consts::new().expect("constant cache");
    let n = (k + 2) as u64;
    let pi = cc.pi(p, rm);
    let big = |x: u64| BigFloat::from_f64(x as f64, p);
    let mut sine = |m: u64| pi.mul(&big(m % (2 * n)), p, rm).div(&big(n), p, rm).sin(p, rm, &mut cc);
    // the sqrt(2/n) factors multiply to (n/2)^{h-1}
    let scale = big(n).div(&big(2), p, rm).powi(h.saturating_sub(1) as usize, p, rm);
    let scale = if h == 0 { big(2).div(&big(n), p, rm) } else { scale };
    let e = 2 - 2 * h as i64 - mus.len() as i64;
    let mut total = BigFloat::from_f64(0.0, p);
    for b in 0..=k as u64 {
        let s0 = sine(b + 1);
        let mut term = if e >= 0 { s0.powi(e as usize, p, rm) } else { s0.powi((-e) as usize, p, rm).reciprocal(p, rm) };
        for &m in mus {
            term = term.mul(&sine((m as u64 + 1) * (b + 1)), p, rm);
        }
        total = total.add(&term, p, rm);
    }
    let total = total.mul(&scale, p, rm);
    format!("{total}").parse().expect("decimal rendering of a finite float")
}

/// `#T_l` by counting classes of `B^sharp(nu) / l` modulo the coroot
/// lattice over a full period box of weights `nu`.
pub fn brute_t_count(d: &RootDatum, l: u32) -> u64 {
    let g = d.gram_scaled();
    let den = d.gram_denominator();
    let r = d.rank();
    let period = l as i64 * den;
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut nu = vec![0i64; r];
    loop {
        let key: Vec<i64> = (0..r)
            .map(|i| (0..r).map(|j| g[i][j] * nu[j]).sum::<i64>().rem_euclid(period))
            .collect();
        seen.insert(key);
        let mut i = 0;
        loop {
            if i == r {
                return seen.len() as u64;
            }
            nu[i] += 1;
            if nu[i] < period {
                break;
            }
            nu[i] = 0;
            i += 1;
        }
    }
}

/// Smallest positive levels for the adjoint group, as tabulated for the
/// prequantization criterion. `None` for types with trivial center.
pub fn l0_table(t: LieType) -> Option<u32> {
    let n = t.rank() as u32;
    match t.family() {
        Family::A if n.is_multiple_of(2) => Some(n + 1),
        Family::A => Some(2 * (n + 1)),
        Family::B => Some(2),
        Family::C if n.is_multiple_of(2) => Some(2),
        Family::C => Some(4),
        Family::D if n.is_multiple_of(2) => Some(4),
        Family::D if n % 4 == 1 => Some(16),
        Family::D => Some(8),
        Family::E if n == 6 => Some(3),
        Family::E if n == 7 => Some(4),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_sum_known_values() {
        assert!((su2_sine_sum(1, 2, &[]) - 4.0).abs() < 1e-9);
        assert!((su2_sine_sum(2, 2, &[]) - 10.0).abs() < 1e-9);
        assert!((su2_sine_sum(4, 2, &[]) - 35.0).abs() < 1e-9);
        assert!((su2_sine_sum(3, 0, &[1, 1]) - 1.0).abs() < 1e-9);
        assert!((su2_sine_sum(3, 0, &[1, 1, 1])).abs() < 1e-9);
    }

    #[test]
    fn brute_counts() {
        let a1 = RootDatum::new("A1".parse().unwrap());
        assert_eq!(brute_t_count(&a1, 3), 6);
        assert_eq!(brute_t_count(&a1, 6), 12);
        let g2 = RootDatum::new("G2".parse().unwrap());
        assert_eq!(brute_t_count(&g2, 1), 3);
    }
}
