//! Small exact linear algebra over Q and Z used by the root-datum builders.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn dot(x: &[Rational], y: &[Rational]) -> Rational {
    x.iter().zip(y).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
}

pub fn add(x: &[Rational], y: &[Rational]) -> Vec<Rational> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn sub(x: &[Rational], y: &[Rational]) -> Vec<Rational> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn scale(s: &Rational, x: &[Rational]) -> Vec<Rational> {
    x.iter().map(|a| s * a).collect()
}

pub fn identity(n: usize) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect()
}

pub fn mat_vec(m: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(b).fold(Rational::zero(), |acc, (x, brow)| acc + x * &brow[j]))
                .collect()
        })
        .collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Gauss-Jordan inverse; `None` when singular.
pub fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                    *x = &*x - &f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn int_det(m: &[Vec<i64>]) -> i64 {
    let q: Vec<Vec<Rational>> = m.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
    let n = q.len();
    let mut a = q;
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return 0;
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if !a[r][col].is_zero() {
                let f = &a[r][col] / &p;
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                    *x = &*x - &f * y;
                }
            }
        }
    }
    det.to_integer().to_i64().expect("determinant fits in i64")
}

/// Index of the lattice spanned by `gens` inside `Z^n`, or `None` if the span
/// is not of full rank. Row-reduces with integer gcd steps.
pub fn lattice_index(gens: &[Vec<i64>], n: usize) -> Option<u64> {
    let mut rows: Vec<Vec<i64>> = gens.to_vec();
    let mut diag = Vec::with_capacity(n);
    for col in 0..n {
        loop {
            let nonzero: Vec<usize> = (0..rows.len()).filter(|&r| rows[r][col] != 0).collect();
            if nonzero.is_empty() {
                return None;
            }
            let piv = *nonzero.iter().min_by_key(|&&r| rows[r][col].abs()).expect("nonempty");
            let mut done = true;
            for &r in &nonzero {
                if r != piv {
                    let q = Integer::div_floor(&rows[r][col], &rows[piv][col]);
                    let prow = rows[piv].clone();
                    for (x, y) in rows[r].iter_mut().zip(&prow) {
                        *x -= q * y;
                    }
                    if rows[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                let prow = rows.remove(piv);
                diag.push(prow[col].unsigned_abs());
                break;
            }
        }
        rows.retain(|r| r.iter().any(|&x| x != 0));
    }
    Some(diag.into_iter().product())
}

pub fn lcm_of_denominators<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

pub fn is_integral(x: &Rational) -> bool {
    x.is_integer()
}

pub fn to_i64(x: &Rational) -> Option<i64> {
    if x.is_integer() {
        x.to_integer().to_i64()
    } else {
        None
    }
}

pub fn abs(x: &Rational) -> Rational {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_a2_cartan() {
        let c = vec![vec![rat(2), rat(-1)], vec![rat(-1), rat(2)]];
        let inv = invert(&c).unwrap();
        assert_eq!(inv[0][0], ratio(2, 3));
        assert_eq!(inv[0][1], ratio(1, 3));
        assert_eq!(mat_mul(&c, &inv), identity(2));
    }

    #[test]
    fn lattice_index_counts_sublattice() {
        assert_eq!(lattice_index(&[vec![2, 0], vec![0, 3]], 2), Some(6));
        assert_eq!(lattice_index(&[vec![1, 1], vec![1, -1]], 2), Some(2));
        assert_eq!(lattice_index(&[vec![1, 1], vec![2, 2]], 2), None);
        assert_eq!(lattice_index(&[vec![4, 6], vec![6, 9], vec![2, 3], vec![0, 1]], 2), Some(2));
    }

    #[test]
    fn determinants() {
        assert_eq!(int_det(&[vec![2, -1], vec![-1, 2]]), 3);
        assert_eq!(int_det(&[vec![2, -1], vec![-3, 2]]), 1);
        assert_eq!(int_det(&[vec![0, 1], vec![1, 0]]), -1);
    }
}
