//! Exact character values at torsion points of the maximal torus.
//!
//! A torsion point `exp(xi)` is recorded by the integers `N <omega_i, xi>`
//! (mod `N`), so a weight `nu` pairs with it through the exponent
//! `sum_i nu_i * pairing_i` and every phase is a power of `zeta_N`.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::cyclotomic::CycloNumber;
use crate::error::CharacterError;
use crate::linalg::{self, Rational};
use crate::root_datum::{RootDatum, WeightVector, DEFAULT_WEYL_CAP};

/// Default cap on `dim V_mu` for the Freudenthal path.
pub const DEFAULT_DIM_CAP: u128 = 5_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusPoint {
    pairing: Vec<i64>,
    modulus: u64,
}

impl TorusPoint {
    pub fn new(pairing: Vec<i64>, modulus: u64) -> Self {
        let n = modulus as i64;
        TorusPoint { pairing: pairing.into_iter().map(|x| x.rem_euclid(n)).collect(), modulus }
    }

    /// `exp(xi)` for `xi` in ambient coordinates.
    pub fn from_ambient(d: &RootDatum, xi: &[Rational]) -> Self {
        let vals: Vec<Rational> = d.fundamental_weights().iter().map(|om| d.inner(om, xi)).collect();
        let n = linalg::lcm_of_denominators(vals.iter());
        let pairing = vals
            .iter()
            .map(|v| linalg::to_i64(&(v * Rational::from_integer(n.clone()))).expect("small pairing"))
            .collect();
        TorusPoint::new(pairing, n.try_into().expect("modulus fits in u64"))
    }

    /// `t_lambda = exp((lambda + rho) / (k + c))`, with modulus `D (k + c)`.
    pub fn special(d: &RootDatum, k: u32, lambda: &WeightVector) -> Self {
        let shifted: Vec<i64> = lambda.0.iter().map(|x| x + 1).collect();
        let pairing = d.gram_scaled().iter().map(|row| row.iter().zip(&shifted).map(|(a, b)| a * b).sum()).collect();
        TorusPoint::new(pairing, d.gram_denominator() as u64 * (k as u64 + d.dual_coxeter() as u64))
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn pairing(&self) -> &[i64] {
        &self.pairing
    }

    /// `N <nu, xi>` reduced mod `N`.
    pub fn exponent(&self, nu: &[i64]) -> i64 {
        let n = self.modulus as i64;
        nu.iter().zip(&self.pairing).map(|(a, b)| a * b).sum::<i64>().rem_euclid(n)
    }

    pub fn is_regular(&self, d: &RootDatum) -> bool {
        d.positive_roots_weight().iter().all(|a| self.exponent(a) != 0)
    }
}

/// `t_lambda` together with the data that produced it.
#[derive(Clone, Debug)]
pub struct SpecialPoint {
    pub k: u32,
    pub lam: WeightVector,
    pub point: TorusPoint,
}

impl SpecialPoint {
    pub fn new(d: &RootDatum, k: u32, lam: WeightVector) -> Self {
        let point = TorusPoint::special(d, k, &lam);
        SpecialPoint { k, lam, point }
    }

    /// `(lambda + rho) / (k + c)` in ambient coordinates.
    pub fn xi(&self, d: &RootDatum) -> Vec<Rational> {
        let shifted = WeightVector(self.lam.0.iter().map(|x| x + 1).collect());
        let s = Rational::new(BigInt::one(), BigInt::from(self.k + d.dual_coxeter()));
        linalg::scale(&s, &d.weight_to_ambient(&shifted))
    }
}

/// `sum coeff * zeta_N^exp` in the smallest field containing all exponents.
pub fn cyclo_from_terms(modulus: u64, terms: &[(i64, i64)]) -> CycloNumber {
    let n = modulus as i64;
    let g = terms.iter().filter(|t| t.1 != 0).fold(n, |g, t| g.gcd(&t.0.rem_euclid(n)));
    let g = if g == 0 { n } else { g };
    CycloNumber::from_exponents((n / g) as u64, terms.iter().map(|&(e, c)| (e.rem_euclid(n) / g, c)))
}

/// Alternating sum `sum_w det(w) zeta^{N <w(v), xi>}` for strictly dominant `v`.
pub fn alternating_sum(d: &RootDatum, v: &[i64], t: &TorusPoint) -> CycloNumber {
    let terms: Vec<(i64, i64)> = d.signed_orbit(v).iter().map(|(u, s)| (t.exponent(u), *s as i64)).collect();
    cyclo_from_terms(t.modulus, &terms)
}

/// Weyl character formula. Fails at singular points and when `|W|` is
/// beyond the enumeration cap.
pub fn eval_character(d: &RootDatum, mu: &WeightVector, t: &TorusPoint) -> Result<CycloNumber, CharacterError> {
    if !mu.is_dominant() {
        return Err(CharacterError::NotDominant(mu.to_string()));
    }
    if mu.is_zero() {
        return Ok(CycloNumber::one(1));
    }
    let order = d.weyl_order();
    if order > DEFAULT_WEYL_CAP {
        return Err(crate::error::RootDatumError::GroupTooLarge { order, cap: DEFAULT_WEYL_CAP }.into());
    }
    if !t.is_regular(d) {
        return Err(CharacterError::Singular);
    }
    let shifted: Vec<i64> = mu.0.iter().map(|x| x + 1).collect();
    let num = alternating_sum(d, &shifted, t);
    let den = alternating_sum(d, &vec![1; d.rank()], t);
    let inv = den.invert().map_err(|_| CharacterError::Singular)?;
    Ok(&num * &inv)
}

/// Character value at a rational point given in ambient coordinates.
pub fn eval_character_at(d: &RootDatum, mu: &WeightVector, xi: &[Rational]) -> Result<CycloNumber, CharacterError> {
    eval_character(d, mu, &TorusPoint::from_ambient(d, xi))
}

/// Default evaluation: Weyl formula when `W` is small enough, else Freudenthal.
pub fn character(d: &RootDatum, mu: &WeightVector, t: &TorusPoint) -> Result<CycloNumber, CharacterError> {
    if d.weyl_order() <= DEFAULT_WEYL_CAP {
        eval_character(d, mu, t)
    } else {
        eval_character_freudenthal(d, mu, t, DEFAULT_DIM_CAP)
    }
}

/// Dominant weights of `V_mu` with their multiplicities (Freudenthal).
pub fn dominant_multiplicities(d: &RootDatum, mu: &WeightVector) -> Vec<(WeightVector, BigUint)> {
    let r = d.rank();
    let roots = d.positive_roots_weight();
    // dominant weights below mu: walk down by positive roots staying dominant
    let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
    let mut stack = vec![mu.0.clone()];
    seen.insert(mu.0.clone(), ());
    while let Some(v) = stack.pop() {
        for a in roots {
            let w: Vec<i64> = v.iter().zip(a).map(|(x, y)| x - y).collect();
            if w.iter().all(|&x| x >= 0) && !seen.contains_key(&w) {
                seen.insert(w.clone(), ());
                stack.push(w);
            }
        }
    }
    // order by height of mu - nu
    let a_t: Vec<Vec<Rational>> = (0..r).map(|i| (0..r).map(|j| linalg::rat(d.cartan()[i][j])).collect()).collect();
    let inv = linalg::invert(&a_t).expect("invertible Cartan matrix");
    let height = |v: &[i64]| -> Rational {
        let diff: Vec<Rational> = mu.0.iter().zip(v).map(|(a, b)| linalg::rat(a - b)).collect();
        linalg::mat_vec(&inv, &diff).into_iter().sum()
    };
    let mut weights: Vec<(Rational, Vec<i64>)> = seen.into_keys().map(|v| (height(&v), v)).collect();
    weights.sort();

    let shifted_norm = |v: &[i64]| {
        let s: Vec<i64> = v.iter().map(|x| x + 1).collect();
        d.weight_inner_scaled(&s, &s)
    };
    let top = shifted_norm(&mu.0);
    let mut mult: HashMap<Vec<i64>, BigInt> = HashMap::new();
    let mut out = Vec::with_capacity(weights.len());
    for (_, nu) in weights {
        let m = if nu == mu.0 {
            BigInt::one()
        } else {
            let mut acc = BigInt::zero();
            for a in roots {
                let mut j = 1i64;
                loop {
                    let w: Vec<i64> = nu.iter().zip(a).map(|(x, y)| x + j * y).collect();
                    let (dom, _) = d.to_dominant(&WeightVector(w.clone()));
                    let Some(mw) = mult.get(&dom.0) else { break };
                    acc += mw * BigInt::from(d.weight_inner_scaled(&w, a));
                    j += 1;
                }
            }
            let denom = top - shifted_norm(&nu);
            debug_assert!(denom > 0);
            let (q, rem) = (acc * BigInt::from(2)).div_rem(&BigInt::from(denom));
            debug_assert!(rem.is_zero(), "Freudenthal recursion is integral");
            q
        };
        mult.insert(nu.clone(), m.clone());
        out.push((WeightVector(nu), m.to_biguint().expect("nonnegative multiplicity")));
    }
    out
}

/// The full weight system of `V_mu`, for repeated evaluation.
#[derive(Clone, Debug)]
pub struct WeightSystem {
    weights: Vec<(Vec<i64>, i64)>,
}

impl WeightSystem {
    pub fn new(d: &RootDatum, mu: &WeightVector, dim_cap: u128) -> Result<Self, CharacterError> {
        if !mu.is_dominant() {
            return Err(CharacterError::NotDominant(mu.to_string()));
        }
        let dim = d.weyl_dimension(mu);
        let dim_u: u128 = dim.clone().try_into().unwrap_or(u128::MAX);
        if dim_u > dim_cap {
            return Err(CharacterError::DimensionCap { dim: dim_u, cap: dim_cap });
        }
        let mut weights = Vec::new();
        for (nu, m) in dominant_multiplicities(d, mu) {
            let m: i64 = m.try_into().expect("multiplicity below dimension cap");
            for w in d.orbit(&nu.0) {
                weights.push((w, m));
            }
        }
        Ok(WeightSystem { weights })
    }

    pub fn eval(&self, t: &TorusPoint) -> CycloNumber {
        let terms: Vec<(i64, i64)> = self.weights.iter().map(|(w, m)| (t.exponent(w), *m)).collect();
        cyclo_from_terms(t.modulus, &terms)
    }
}

/// Character via the full weight system; valid at every point.
pub fn eval_character_freudenthal(
    d: &RootDatum,
    mu: &WeightVector,
    t: &TorusPoint,
    dim_cap: u128,
) -> Result<CycloNumber, CharacterError> {
    Ok(WeightSystem::new(d, mu, dim_cap)?.eval(t))
}

/// `|J(exp xi)|^2 = prod_{alpha > 0} (2 - zeta^a - zeta^{-a})`.
pub fn weyl_denominator_sq(d: &RootDatum, t: &TorusPoint) -> CycloNumber {
    let n = t.modulus as i64;
    let exps: Vec<i64> = d.positive_roots_weight().iter().map(|a| t.exponent(a)).collect();
    let g = exps.iter().fold(n, |g, e| g.gcd(e));
    let m = (n / g) as usize;
    if m == 1 {
        return CycloNumber::zero(1);
    }
    let mut poly = vec![BigInt::zero(); m];
    poly[0] = BigInt::one();
    for e in exps {
        let a = (e / g) as usize;
        if a == 0 {
            return CycloNumber::zero(m as u64);
        }
        let mut next = vec![BigInt::zero(); m];
        for (i, c) in poly.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            next[i] += c * 2;
            next[(i + a) % m] -= c;
            next[(i + m - a) % m] -= c;
        }
        poly = next;
    }
    CycloNumber::from_cyclic(m as u64, &poly, BigInt::one())
}

/// `#T_l = l^rank * #Z(G) * #(R / R_long)`.
pub fn t_count(d: &RootDatum, l: u32) -> BigUint {
    BigUint::from(l).pow(d.rank() as u32) * BigUint::from(d.center_order()) * BigUint::from(d.long_index())
}

/// Membership of a weight-coordinate vector in the lattice generated by
/// `c m_alpha alpha`, i.e. `c` times the coroot lattice under the basic
/// identification.
pub fn in_scaled_coroot_lattice(d: &RootDatum, v: &[i64], c: i64) -> bool {
    let m = d.gram_denominator() * c;
    d.gram_scaled().iter().all(|row| row.iter().zip(v).map(|(a, b)| a * b).sum::<i64>() % m == 0)
}

/// `chi_mu(exp(rho/c))` through the lattice criterion: `(-1)^{l(w)}` if some
/// `w(mu + rho) - rho` lies in `c Q^vee`, else 0.
pub fn kostant_character(d: &RootDatum, mu: &WeightVector, k: u32) -> Result<i8, CharacterError> {
    let c = d.dual_coxeter();
    if !k.is_multiple_of(c) {
        return Err(CharacterError::ExceptionalAbsent { c, k });
    }
    let shifted: Vec<i64> = mu.0.iter().map(|x| x + 1).collect();
    for (v, s) in d.signed_orbit(&shifted) {
        let diff: Vec<i64> = v.iter().map(|x| x - 1).collect();
        if in_scaled_coroot_lattice(d, &diff, c as i64) {
            return Ok(s);
        }
    }
    Ok(0)
}

/// `lambda_0 = (k/c) rho`.
pub fn exceptional_weight(d: &RootDatum, k: u32) -> Result<WeightVector, CharacterError> {
    let c = d.dual_coxeter();
    if !k.is_multiple_of(c) {
        return Err(CharacterError::ExceptionalAbsent { c, k });
    }
    Ok(WeightVector(vec![(k / c) as i64; d.rank()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ratio;
    use crate::root_datum::LieType;

    fn d(s: &str) -> RootDatum {
        RootDatum::new(s.parse::<LieType>().unwrap())
    }

    /// A_1 point with `<alpha, xi> = s`.
    fn a1_point(num: i64, den: i64) -> TorusPoint {
        // <omega, xi> = s/2
        TorusPoint::new(vec![num], 2 * den as u64)
    }

    #[test]
    fn special_point_pairings() {
        let a1 = d("A1");
        let t = TorusPoint::special(&a1, 1, &WeightVector(vec![0]));
        assert_eq!((t.pairing().to_vec(), t.modulus()), (vec![1], 6));
        let sp = SpecialPoint::new(&a1, 1, WeightVector(vec![0]));
        let xi = sp.xi(&a1);
        assert_eq!(TorusPoint::from_ambient(&a1, &xi), a1_point(1, 3));
        assert_eq!(a1.inner(&a1.simple_roots()[0], &xi), ratio(1, 3));
    }

    #[test]
    fn a1_character_values() {
        let a1 = d("A1");
        let w = WeightVector(vec![1]);
        assert!(eval_character(&a1, &WeightVector(vec![0]), &a1_point(1, 3)).unwrap().is_one());
        assert!(eval_character(&a1, &w, &a1_point(1, 3)).unwrap().is_one());
        assert!(eval_character(&a1, &w, &a1_point(1, 2)).unwrap().is_zero());
        assert!(matches!(eval_character(&a1, &w, &TorusPoint::new(vec![0], 1)), Err(CharacterError::Singular)));
        // 1 + 2 cos(2 pi s) at s = 1/5
        let adj = eval_character_freudenthal(&a1, &WeightVector(vec![2]), &a1_point(1, 5), DEFAULT_DIM_CAP).unwrap();
        let expect = 1.0 + 2.0 * (2.0 * std::f64::consts::PI / 5.0).cos();
        assert!((adj.approx().re - expect).abs() < 1e-12);
    }

    #[test]
    fn freudenthal_multiplicities() {
        let a1 = d("A1");
        let m: Vec<_> = dominant_multiplicities(&a1, &WeightVector(vec![2])).into_iter().map(|(w, m)| (w.0, m)).collect();
        assert_eq!(m, vec![(vec![2], BigUint::one()), (vec![0], BigUint::one())]);
        let a2 = d("A2");
        let total: u64 = dominant_multiplicities(&a2, &WeightVector(vec![1, 0]))
            .iter()
            .map(|(w, m)| a2.orbit(&w.0).len() as u64 * u64::try_from(m.clone()).unwrap())
            .sum();
        assert_eq!(total, 3);
        // adjoint of A2: zero weight has multiplicity 2
        let adj = dominant_multiplicities(&a2, &WeightVector(vec![1, 1]));
        assert_eq!(adj.last().unwrap(), &(WeightVector(vec![0, 0]), BigUint::from(2u32)));
    }

    #[test]
    fn weight_systems_match_weyl_dimension() {
        for (t, mu) in [("B2", vec![1, 1]), ("G2", vec![1, 1]), ("C3", vec![0, 1, 0]), ("D4", vec![0, 1, 0, 0])] {
            let dd = d(t);
            let mu = WeightVector(mu);
            let total: BigInt = dominant_multiplicities(&dd, &mu)
                .iter()
                .map(|(w, m)| BigInt::from(dd.orbit(&w.0).len()) * BigInt::from(m.clone()))
                .sum();
            assert_eq!(total, dd.weyl_dimension(&mu), "{t}");
            // evaluation at the identity gives the dimension
            let id = TorusPoint::new(vec![0; dd.rank()], 1);
            let v = eval_character_freudenthal(&dd, &mu, &id, DEFAULT_DIM_CAP).unwrap();
            assert_eq!(v.as_integer().unwrap(), dd.weyl_dimension(&mu));
        }
    }

    #[test]
    fn weyl_and_freudenthal_agree() {
        for (t, k) in [("A2", 3), ("B2", 2), ("G2", 2), ("A3", 2)] {
            let dd = d(t);
            for lam in dd.level_weights(k) {
                let pt = TorusPoint::special(&dd, k, &lam);
                for mu in dd.level_weights(k) {
                    let a = eval_character(&dd, &mu, &pt).unwrap();
                    let b = eval_character_freudenthal(&dd, &mu, &pt, DEFAULT_DIM_CAP).unwrap();
                    assert_eq!(a, b, "{t} mu={mu} lam={lam}");
                }
            }
        }
    }

    #[test]
    fn denominator_values() {
        let a1 = d("A1");
        assert_eq!(weyl_denominator_sq(&a1, &a1_point(1, 3)).as_integer().unwrap(), BigInt::from(3));
        assert_eq!(weyl_denominator_sq(&a1, &a1_point(1, 2)).as_integer().unwrap(), BigInt::from(4));
        assert!(weyl_denominator_sq(&d("G2"), &TorusPoint::new(vec![0, 0], 1)).is_zero());
    }

    #[test]
    fn denominator_is_squared_alternating_sum() {
        let dd = d("B3");
        for lam in dd.level_weights(2) {
            let pt = TorusPoint::special(&dd, 2, &lam);
            let j = alternating_sum(&dd, &[1, 1, 1], &pt);
            let jsq = weyl_denominator_sq(&dd, &pt);
            assert_eq!(&j * &j.conj(), jsq);
            assert!((&jsq * &jsq.invert().unwrap()).is_one());
        }
    }

    #[test]
    fn exceptional_denominator_is_t_c() {
        for t in ["A1", "A2", "B2", "G2", "C3", "D4", "F4"] {
            let dd = d(t);
            let c = dd.dual_coxeter();
            let pt = TorusPoint::special(&dd, c, &exceptional_weight(&dd, c).unwrap());
            let jsq = weyl_denominator_sq(&dd, &pt);
            assert_eq!(jsq.as_integer().unwrap(), BigInt::from(t_count(&dd, c)), "{t}");
        }
    }

    #[test]
    fn t_count_values() {
        let a1 = d("A1");
        assert_eq!(t_count(&a1, 3), BigUint::from(6u32));
        assert_eq!(t_count(&a1, 6), BigUint::from(12u32));
        assert_eq!(t_count(&d("G2"), 1), BigUint::from(3u32));
    }

    #[test]
    fn kostant_examples() {
        let a1 = d("A1");
        assert_eq!(kostant_character(&a1, &WeightVector(vec![0]), 2).unwrap(), 1);
        assert_eq!(kostant_character(&a1, &WeightVector(vec![1]), 2).unwrap(), 0);
        assert!(matches!(kostant_character(&a1, &WeightVector(vec![0]), 3), Err(CharacterError::ExceptionalAbsent { .. })));
        for t in ["A1", "A2", "B2", "G2"] {
            let dd = d(t);
            let c = dd.dual_coxeter();
            let k = 2 * c;
            let pt = TorusPoint::special(&dd, k, &exceptional_weight(&dd, k).unwrap());
            for mu in dd.level_weights(k) {
                let direct = eval_character(&dd, &mu, &pt).unwrap();
                let kc = kostant_character(&dd, &mu, k).unwrap();
                assert_eq!(direct, CycloNumber::from_integer(1, kc as i64), "{t} {mu}");
            }
        }
    }
}
