//! Exact arithmetic in the cyclotomic fields `Q(zeta_N)`.
//!
//! An element is a polynomial of degree `< phi(N)` in `zeta = zeta_N`, stored
//! as integer numerators over one positive common denominator. The
//! representation is canonical (reduced modulo `Phi_N`, `gcd(num, den) = 1`),
//! so equality within one modulus is structural. Mixed moduli are lifted to
//! their lcm.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::CycloError;

/// `Phi_N` together with the reductions `x^j mod Phi_N` for `phi(N) <= j < N`.
#[derive(Debug)]
pub struct CycloField {
    modulus: u64,
    degree: usize,
    phi_poly: Vec<BigInt>,
    reductions: Vec<Vec<BigInt>>,
}

impl CycloField {
    fn build(n: u64) -> Self {
        let phi_poly = cyclotomic_polynomial(n);
        let degree = phi_poly.len() - 1;
        // x^degree = -(lower part of Phi_N), then shift repeatedly
        let mut reductions = Vec::with_capacity(n as usize - degree);
        let mut cur: Vec<BigInt> = phi_poly[..degree].iter().map(|c| -c).collect();
        for _ in degree..n as usize {
            reductions.push(cur.clone());
            let top = cur[degree - 1].clone();
            let mut next = vec![BigInt::zero(); degree];
            for i in (1..degree).rev() {
                next[i] = cur[i - 1].clone();
            }
            if !top.is_zero() {
                for (i, c) in next.iter_mut().enumerate() {
                    *c -= &top * &phi_poly[i];
                }
            }
            cur = next;
        }
        CycloField { modulus: n, degree, phi_poly, reductions }
    }

    /// Shared, cached field data for `Q(zeta_n)`.
    pub fn get(n: u64) -> Arc<CycloField> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<CycloField>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("cyclotomic cache poisoned");
        guard.entry(n.max(1)).or_insert_with(|| Arc::new(CycloField::build(n.max(1)))).clone()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `phi(N)`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficients of `Phi_N`, constant term first.
    pub fn phi_poly(&self) -> &[BigInt] {
        &self.phi_poly
    }

    /// Reduce a vector of coefficients indexed by exponent mod `N`.
    fn reduce_cyclic(&self, cyc: &[BigInt]) -> Vec<BigInt> {
        debug_assert_eq!(cyc.len(), self.modulus as usize);
        let mut out: Vec<BigInt> = cyc[..self.degree].to_vec();
        for (j, c) in cyc.iter().enumerate().skip(self.degree) {
            if c.is_zero() {
                continue;
            }
            for (o, r) in out.iter_mut().zip(&self.reductions[j - self.degree]) {
                if !r.is_zero() {
                    *o += c * r;
                }
            }
        }
        out
    }

    /// Same as `reduce_cyclic` with machine-integer input.
    fn reduce_cyclic_i64(&self, cyc: &[i64]) -> Vec<BigInt> {
        let mut out: Vec<BigInt> = cyc[..self.degree].iter().map(|&c| BigInt::from(c)).collect();
        for (j, &c) in cyc.iter().enumerate().skip(self.degree) {
            if c == 0 {
                continue;
            }
            for (o, r) in out.iter_mut().zip(&self.reductions[j - self.degree]) {
                if !r.is_zero() {
                    *o += r * c;
                }
            }
        }
        out
    }
}

/// `Phi_n` by exact division of `x^n - 1` by `Phi_d` for the proper divisors `d`.
pub fn cyclotomic_polynomial(n: u64) -> Vec<BigInt> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<BigInt>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().expect("poisoned").get(&n) {
        return p.clone();
    }
    let mut p = vec![BigInt::zero(); n as usize + 1];
    p[0] = -BigInt::one();
    p[n as usize] = BigInt::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            p = exact_div_monic(&p, &cyclotomic_polynomial(d));
        }
    }
    cache.lock().expect("poisoned").insert(n, p.clone());
    p
}

fn exact_div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qd = rem.len() - 1 - dd;
    let mut q = vec![BigInt::zero(); qd + 1];
    for i in (0..=qd).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dc) in den.iter().enumerate() {
            rem[i + j] -= &c * dc;
        }
        q[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "inexact cyclotomic division");
    q
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(into = "CycloRepr", try_from = "CycloRepr")]
pub struct CycloNumber {
    modulus: u64,
    num: Vec<BigInt>,
    den: BigInt,
}

#[derive(Serialize, Deserialize)]
struct CycloRepr {
    modulus: u64,
    numerators: Vec<String>,
    denominator: String,
}

impl From<CycloNumber> for CycloRepr {
    fn from(x: CycloNumber) -> Self {
        CycloRepr {
            modulus: x.modulus,
            numerators: x.num.iter().map(ToString::to_string).collect(),
            denominator: x.den.to_string(),
        }
    }
}

impl TryFrom<CycloRepr> for CycloNumber {
    type Error = String;

    fn try_from(r: CycloRepr) -> Result<Self, String> {
        let parse = |s: &String| s.parse::<BigInt>().map_err(|e| format!("bad integer `{s}`: {e}"));
        let num = r.numerators.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
        let den = parse(&r.denominator)?;
        let field = CycloField::get(r.modulus);
        if num.len() != field.degree() || den.is_zero() {
            return Err("malformed cyclotomic number".into());
        }
        Ok(CycloNumber::from_parts(r.modulus, num, den))
    }
}

impl CycloNumber {
    fn from_parts(modulus: u64, num: Vec<BigInt>, den: BigInt) -> Self {
        let mut x = CycloNumber { modulus, num, den };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        if self.den.is_negative() {
            self.den = -&self.den;
            for c in self.num.iter_mut() {
                *c = -&*c;
            }
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if self.num.iter().all(Zero::is_zero) {
            self.den = BigInt::one();
        } else if !g.is_one() {
            for c in self.num.iter_mut() {
                *c = &*c / &g;
            }
            self.den = &self.den / &g;
        }
    }

    pub fn zero(modulus: u64) -> Self {
        let d = CycloField::get(modulus).degree();
        CycloNumber { modulus: modulus.max(1), num: vec![BigInt::zero(); d], den: BigInt::one() }
    }

    pub fn one(modulus: u64) -> Self {
        Self::from_integer(modulus, 1)
    }

    pub fn from_integer(modulus: u64, n: i64) -> Self {
        Self::from_bigint(modulus, BigInt::from(n))
    }

    pub fn from_bigint(modulus: u64, n: BigInt) -> Self {
        let mut x = Self::zero(modulus);
        x.num[0] = n;
        x
    }

    pub fn from_rational(modulus: u64, q: &BigRational) -> Self {
        let mut x = Self::zero(modulus);
        x.num[0] = q.numer().clone();
        x.den = q.denom().clone();
        x.normalize();
        x
    }

    /// `zeta_N^a`.
    pub fn root_of_unity(modulus: u64, a: i64) -> Self {
        let n = modulus.max(1);
        let mut cyc = vec![0i64; n as usize];
        cyc[a.rem_euclid(n as i64) as usize] = 1;
        Self::from_cyclic_i64(n, &cyc)
    }

    /// Element with coefficient `cyc[j]` on `zeta^j`, `cyc.len() == N`.
    pub fn from_cyclic_i64(modulus: u64, cyc: &[i64]) -> Self {
        let field = CycloField::get(modulus);
        Self::from_parts(modulus, field.reduce_cyclic_i64(cyc), BigInt::one())
    }

    pub fn from_cyclic(modulus: u64, cyc: &[BigInt], den: BigInt) -> Self {
        let field = CycloField::get(modulus);
        Self::from_parts(modulus, field.reduce_cyclic(cyc), den)
    }

    /// `sum coeff * zeta^exp` over the given terms.
    pub fn from_exponents(modulus: u64, terms: impl IntoIterator<Item = (i64, i64)>) -> Self {
        let n = modulus.max(1) as i64;
        let mut cyc = vec![0i64; n as usize];
        for (e, c) in terms {
            cyc[e.rem_euclid(n) as usize] += c;
        }
        Self::from_cyclic_i64(n as u64, &cyc)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    /// Rational coefficients on the power basis `1, zeta, ..., zeta^{phi-1}`.
    pub fn coeffs(&self) -> Vec<BigRational> {
        self.num.iter().map(|c| BigRational::new(c.clone(), self.den.clone())).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Zero::is_zero)
    }

    /// Lift to `Q(zeta_m)` for a multiple `m` of the current modulus.
    pub fn lift(&self, m: u64) -> CycloNumber {
        if m == self.modulus {
            return self.clone();
        }
        assert!(m.is_multiple_of(self.modulus), "lift target {m} is not a multiple of {}", self.modulus);
        let step = (m / self.modulus) as usize;
        let mut cyc = vec![BigInt::zero(); m as usize];
        for (i, c) in self.num.iter().enumerate() {
            cyc[i * step] = c.clone();
        }
        let field = CycloField::get(m);
        CycloNumber { modulus: m, num: field.reduce_cyclic(&cyc), den: self.den.clone() }
    }

    fn common(a: &CycloNumber, b: &CycloNumber) -> (CycloNumber, CycloNumber) {
        if a.modulus == b.modulus {
            (a.clone(), b.clone())
        } else {
            let m = a.modulus.lcm(&b.modulus);
            (a.lift(m), b.lift(m))
        }
    }

    /// Apply `zeta -> zeta^a` for `a` coprime to `N`.
    pub fn galois(&self, a: i64) -> CycloNumber {
        let n = self.modulus as i64;
        assert_eq!(a.rem_euclid(n).gcd(&n), 1, "Galois exponent must be a unit mod N");
        let mut cyc = vec![BigInt::zero(); n as usize];
        for (i, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                cyc[(a * i as i64).rem_euclid(n) as usize] += c;
            }
        }
        Self::from_cyclic(self.modulus, &cyc, self.den.clone())
    }

    /// Complex conjugation, `zeta -> zeta^{-1}`.
    pub fn conj(&self) -> CycloNumber {
        if self.modulus <= 2 {
            return self.clone();
        }
        self.galois(-1)
    }

    fn add_ref(&self, other: &CycloNumber) -> CycloNumber {
        if self.modulus != other.modulus {
            let (a, b) = Self::common(self, other);
            return a.add_ref(&b);
        }
        if self.den == other.den {
            let num = self.num.iter().zip(&other.num).map(|(a, b)| a + b).collect();
            return Self::from_parts(self.modulus, num, self.den.clone());
        }
        let num = self.num.iter().zip(&other.num).map(|(a, b)| a * &other.den + b * &self.den).collect();
        Self::from_parts(self.modulus, num, &self.den * &other.den)
    }

    fn mul_ref(&self, other: &CycloNumber) -> CycloNumber {
        if self.modulus != other.modulus {
            let (a, b) = Self::common(self, other);
            return a.mul_ref(&b);
        }
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.modulus);
        }
        let n = self.modulus as usize;
        let mut cyc = vec![BigInt::zero(); n];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if !b.is_zero() {
                    cyc[(i + j) % n] += a * b;
                }
            }
        }
        Self::from_cyclic(self.modulus, &cyc, &self.den * &other.den)
    }

    pub fn scale_int(&self, s: &BigInt) -> CycloNumber {
        let num = self.num.iter().map(|c| c * s).collect();
        Self::from_parts(self.modulus, num, self.den.clone())
    }

    pub fn scale_rational(&self, q: &BigRational) -> CycloNumber {
        let num = self.num.iter().map(|c| c * q.numer()).collect();
        Self::from_parts(self.modulus, num, &self.den * q.denom())
    }

    pub fn pow(&self, e: u32) -> CycloNumber {
        let mut base = self.clone();
        let mut acc = Self::one(self.modulus);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiplicative inverse. Small fields use the extended Euclidean
    /// algorithm over `Q[x]` against `Phi_N`; larger ones solve modulo word
    /// primes, lift by CRT and rational reconstruction, and accept a candidate
    /// only once it multiplies back to one exactly.
    pub fn invert(&self) -> Result<CycloNumber, CycloError> {
        if self.is_zero() {
            return Err(CycloError::DivisionByZero(self.modulus));
        }
        if let Some(q) = self.as_rational_opt() {
            return Ok(Self::from_rational(self.modulus, &q.recip()));
        }
        if CycloField::get(self.modulus).degree() >= MODULAR_INVERSE_DEGREE {
            return Ok(self.invert_modular());
        }
        self.invert_euclid()
    }

    fn invert_euclid(&self) -> Result<CycloNumber, CycloError> {
        let field = CycloField::get(self.modulus);
        let to_q = |v: &[BigInt]| -> Vec<BigRational> { v.iter().map(|c| BigRational::from_integer(c.clone())).collect() };
        // Invariant: r_i = s_i * f (mod Phi_N). Start with r0 = Phi_N, r1 = f.
        let mut r0 = to_q(field.phi_poly());
        let mut r1 = trim(to_q(&self.num));
        let mut s0: Vec<BigRational> = vec![];
        let mut s1: Vec<BigRational> = vec![BigRational::one()];
        while r1.len() > 1 {
            let (q, r) = poly_divmod(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, trim(r));
            s0 = std::mem::replace(&mut s1, s2);
            if r1.is_empty() {
                // gcd nontrivial: impossible for nonzero elements of a field
                return Err(CycloError::DivisionByZero(self.modulus));
            }
        }
        // s1 inverts the numerator; the inverse of num/den is den * s1
        let c = BigRational::from_integer(self.den.clone()) / &r1[0];
        let inv: Vec<BigRational> = s1.iter().map(|x| x * &c).collect();
        // reduce inv modulo Phi_N (degree may exceed phi - 1)
        let (_, rem) = poly_divmod(&inv, &to_q(field.phi_poly()));
        Ok(Self::from_rational_coeffs(self.modulus, &rem))
    }

    fn invert_modular(&self) -> CycloNumber {
        let field = CycloField::get(self.modulus);
        let d = field.degree();
        let mut residues = vec![BigInt::zero(); d];
        let mut m = BigInt::one();
        let mut used = 0usize;
        let mut target = 8usize;
        let mut p = 1u64 << 31;
        loop {
            p = prev_prime(p);
            let Some(v) = poly_inverse_mod_p(&reduce_mod_p(&self.num, p), &reduce_mod_p(field.phi_poly(), p), p) else {
                continue;
            };
            // CRT: x = r + m * ((v - r) * m^{-1} mod p)
            let bp = BigInt::from(p);
            let m_inv = pow_mod_u64(to_residue(&m, p), p - 2, p);
            for (r, &vi) in residues.iter_mut().zip(&v) {
                let diff = (vi + p - to_residue(r, p)) % p;
                let t = diff * m_inv % p;
                *r += &m * BigInt::from(t);
            }
            m *= &bp;
            used += 1;
            if used < target {
                continue;
            }
            target *= 2;
            if let Some(candidate) = reconstruct(&residues, &m) {
                // candidate inverts the numerator; the inverse of num/den is den * candidate
                let inv = CycloNumber::from_parts(
                    self.modulus,
                    candidate.0.iter().map(|c| c * &self.den).collect(),
                    candidate.1,
                );
                if self.mul_ref(&inv).is_one() {
                    return inv;
                }
            }
        }
    }

    fn from_rational_coeffs(modulus: u64, coeffs: &[BigRational]) -> CycloNumber {
        let d = CycloField::get(modulus).degree();
        let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut num = vec![BigInt::zero(); d];
        for (i, c) in coeffs.iter().enumerate() {
            num[i] = c.numer() * (&den / c.denom());
        }
        Self::from_parts(modulus, num, den)
    }

    fn as_rational_opt(&self) -> Option<BigRational> {
        if self.num[1..].iter().all(Zero::is_zero) {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    /// The value as a rational number; fails (never rounds) if irrational.
    pub fn as_rational(&self) -> Result<BigRational, CycloError> {
        self.as_rational_opt().ok_or_else(|| {
            let z = self.approx();
            CycloError::NotRational { re: z.re, im: z.im }
        })
    }

    pub fn as_integer(&self) -> Result<BigInt, CycloError> {
        let q = self.as_rational()?;
        if q.is_integer() {
            Ok(q.to_integer())
        } else {
            Err(CycloError::NotInteger(q.to_string()))
        }
    }

    /// Evaluate in the embedding `zeta -> e^{2 pi i / N}`.
    pub fn approx(&self) -> Complex64 {
        let n = self.modulus as f64;
        let mut z = Complex64::new(0.0, 0.0);
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let q = BigRational::new(c.clone(), self.den.clone()).to_f64().unwrap_or(f64::NAN);
            z += Complex64::from_polar(q, 2.0 * std::f64::consts::PI * i as f64 / n);
        }
        z
    }
}

/// Fields of at least this degree invert through modular images.
const MODULAR_INVERSE_DEGREE: usize = 4;

fn prev_prime(mut p: u64) -> u64 {
    loop {
        p -= 1;
        if primal_check::miller_rabin(p) {
            return p;
        }
    }
}

/// Word primes stay below `2^31` so products fit in `u64`.
fn pow_mod_u64(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn to_residue(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
}

fn reduce_mod_p(v: &[BigInt], p: u64) -> Vec<u64> {
    v.iter().map(|c| to_residue(c, p)).collect()
}

fn trim_mod(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

/// `a^{-1} mod (phi, p)` with `phi` monic of degree `> deg a`, or `None` if
/// `a` is not a unit there.
fn poly_inverse_mod_p(a: &[u64], phi: &[u64], p: u64) -> Option<Vec<u64>> {
    let d = phi.len() - 1;
    let mul = |x: u64, y: u64| x * y % p;
    let mut r0 = trim_mod(phi.to_vec());
    let mut r1 = trim_mod(a.to_vec());
    let mut s0: Vec<u64> = vec![];
    let mut s1: Vec<u64> = vec![1];
    while r1.len() > 1 {
        // one division step r0 = q r1 + r, with s2 = s0 - q s1
        let lead_inv = pow_mod_u64(*r1.last().expect("nonempty"), p - 2, p);
        let mut r = r0.clone();
        let mut q = vec![0u64; r0.len() + 1 - r1.len()];
        while r.len() >= r1.len() {
            let shift = r.len() - r1.len();
            let c = mul(*r.last().expect("nonempty"), lead_inv);
            q[shift] = c;
            for (i, &b) in r1.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - mul(c, b)) % p;
            }
            r = trim_mod(r);
            if r.is_empty() {
                break;
            }
        }
        let mut s2 = s0.clone();
        s2.resize((q.len() + s1.len()).max(s0.len()), 0);
        for (i, &qi) in q.iter().enumerate() {
            if qi == 0 {
                continue;
            }
            for (j, &sj) in s1.iter().enumerate() {
                s2[i + j] = (s2[i + j] + p - mul(qi, sj)) % p;
            }
        }
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, trim_mod(s2));
        if r1.is_empty() {
            return None;
        }
    }
    let c = pow_mod_u64(r1[0], p - 2, p);
    let mut out: Vec<u64> = s1.iter().map(|&x| mul(x, c)).collect();
    out.resize(d, 0);
    Some(out)
}

/// Integer numerators over a common denominator from residues modulo `m`.
fn reconstruct(residues: &[BigInt], m: &BigInt) -> Option<(Vec<BigInt>, BigInt)> {
    let bound = (m / BigInt::from(2)).sqrt();
    let half = m / BigInt::from(2);
    let mut den = BigInt::one();
    let mut nums: Vec<BigInt> = Vec::with_capacity(residues.len());
    for r in residues {
        let mut c = (r * &den).mod_floor(m);
        if c > half {
            c -= m;
        }
        if c.abs() > bound {
            let (a, b) = rational_reconstruction(&c.mod_floor(m), m, &bound)?;
            for x in nums.iter_mut() {
                *x *= &b;
            }
            den *= &b;
            c = a;
        }
        nums.push(c);
    }
    Some((nums, den))
}

/// `a / b = r mod m` with `|a|, b <= bound`.
fn rational_reconstruction(r: &BigInt, m: &BigInt, bound: &BigInt) -> Option<(BigInt, BigInt)> {
    let (mut r0, mut r1) = (m.clone(), r.clone());
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while &r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || &t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    if t1.is_negative() {
        Some((-r1, -t1))
    } else {
        Some((r1, t1))
    }
}

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let z = BigRational::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect())
}

fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let b = trim(b.to_vec());
    let mut rem = trim(a.to_vec());
    if rem.len() < b.len() {
        return (vec![], rem);
    }
    let lead = b.last().expect("nonzero divisor").clone();
    let mut q = vec![BigRational::zero(); rem.len() - b.len() + 1];
    while rem.len() >= b.len() {
        let shift = rem.len() - b.len();
        let c = rem.last().expect("nonempty") / &lead;
        for (j, bc) in b.iter().enumerate() {
            rem[shift + j] -= &c * bc;
        }
        q[shift] = c;
        rem.pop();
        rem = trim(rem);
    }
    (trim(q), rem)
}

impl PartialEq for CycloNumber {
    fn eq(&self, other: &Self) -> bool {
        if self.modulus == other.modulus {
            self.den == other.den && self.num == other.num
        } else {
            let (a, b) = Self::common(self, other);
            a == b
        }
    }
}

impl Eq for CycloNumber {}

impl fmt::Debug for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycloNumber({self})")
    }
}

impl fmt::Display for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.as_rational_opt() {
            return write!(f, "{q}");
        }
        let mut first = true;
        if !self.den.is_one() {
            write!(f, "(")?;
        }
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                _ if a.is_one() => write!(f, "z^{i}")?,
                _ => write!(f, "{a}*z^{i}")?,
            }
        }
        if !self.den.is_one() {
            write!(f, ")/{}", self.den)?;
        }
        write!(f, " [z = zeta_{}]", self.modulus)
    }
}

impl Add for &CycloNumber {
    type Output = CycloNumber;
    fn add(self, rhs: &CycloNumber) -> CycloNumber {
        self.add_ref(rhs)
    }
}

impl Add for CycloNumber {
    type Output = CycloNumber;
    fn add(self, rhs: CycloNumber) -> CycloNumber {
        self.add_ref(&rhs)
    }
}

impl Sub for &CycloNumber {
    type Output = CycloNumber;
    fn sub(self, rhs: &CycloNumber) -> CycloNumber {
        self.add_ref(&-rhs)
    }
}

impl Sub for CycloNumber {
    type Output = CycloNumber;
    fn sub(self, rhs: CycloNumber) -> CycloNumber {
        &self - &rhs
    }
}

impl Mul for &CycloNumber {
    type Output = CycloNumber;
    fn mul(self, rhs: &CycloNumber) -> CycloNumber {
        self.mul_ref(rhs)
    }
}

impl Mul for CycloNumber {
    type Output = CycloNumber;
    fn mul(self, rhs: CycloNumber) -> CycloNumber {
        self.mul_ref(&rhs)
    }
}

impl Neg for &CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        CycloNumber { modulus: self.modulus, num: self.num.iter().map(|c| -c).collect(), den: self.den.clone() }
    }
}

impl Neg for CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        -&self
    }
}

impl std::iter::Sum for CycloNumber {
    fn sum<I: Iterator<Item = CycloNumber>>(iter: I) -> CycloNumber {
        iter.fold(CycloNumber::zero(1), |a, b| a + b)
    }
}

/// An exact value paired with its floating-point image, updated in lockstep.
#[derive(Clone, Debug)]
pub struct Shadowed {
    pub exact: CycloNumber,
    pub shadow: Complex64,
}

impl Shadowed {
    pub fn new(exact: CycloNumber) -> Self {
        let shadow = exact.approx();
        Shadowed { exact, shadow }
    }

    pub fn add(&self, o: &Shadowed) -> Shadowed {
        Shadowed { exact: &self.exact + &o.exact, shadow: self.shadow + o.shadow }
    }

    pub fn mul(&self, o: &Shadowed) -> Shadowed {
        Shadowed { exact: &self.exact * &o.exact, shadow: self.shadow * o.shadow }
    }

    pub fn conj(&self) -> Shadowed {
        Shadowed { exact: self.exact.conj(), shadow: self.shadow.conj() }
    }

    pub fn invert(&self) -> Result<Shadowed, CycloError> {
        Ok(Shadowed { exact: self.exact.invert()?, shadow: self.shadow.inv() })
    }

    /// Relative disagreement between the exact value and the shadow.
    pub fn drift(&self) -> f64 {
        let e = self.exact.approx();
        (e - self.shadow).norm() / e.norm().max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(n: u64, a: i64) -> CycloNumber {
        CycloNumber::root_of_unity(n, a)
    }

    #[test]
    fn cyclotomic_polynomials() {
        let p = |n| cyclotomic_polynomial(n).iter().map(|c| c.to_i64().unwrap()).collect::<Vec<_>>();
        assert_eq!(p(1), vec![-1, 1]);
        assert_eq!(p(4), vec![1, 0, 1]);
        assert_eq!(p(6), vec![1, -1, 1]);
        assert_eq!(p(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(p(105)[7], BigInt::from(-2).to_i64().unwrap());
    }

    #[test]
    fn modular_inverse_matches_euclid() {
        for n in [25u64, 63, 125] {
            let x = &(&z(n, 1) + &z(n, 7).scale_rational(&BigRational::new(3.into(), 2.into()))) - &CycloNumber::from_integer(n, 5);
            let a = x.invert_modular();
            assert!((&x * &a).is_one());
            let b = x.invert_euclid().unwrap();
            assert!((&x * &b).is_one());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(&z(4, 1) * &z(4, 1), z(4, 2));
        assert_eq!(z(4, 2), CycloNumber::from_integer(4, -1));
        assert!(z(7, 0).is_one());
        assert_eq!(&z(3, 1) + &z(3, 2), CycloNumber::from_integer(3, -1));
        assert_eq!(z(12, 13), z(12, 1));
        assert_eq!(z(6, 2), z(3, 1));
    }

    #[test]
    fn golden_ratio_product() {
        let a = &z(5, 1) + &z(5, 4);
        let b = &z(5, 2) + &z(5, 3);
        assert_eq!(&a * &b, CycloNumber::from_integer(5, -1));
        let f = a.approx() * b.approx();
        assert!((f.re + 1.0).abs() < 1e-12 && f.im.abs() < 1e-12);
    }

    #[test]
    fn inverses() {
        assert!(CycloNumber::one(9).invert().unwrap().is_one());
        assert_eq!(z(9, 2).invert().unwrap(), z(9, -2));
        let two = CycloNumber::from_integer(3, 2);
        let x = &(&two - &z(3, 1)) - &z(3, 2);
        assert_eq!(x.invert().unwrap(), CycloNumber::from_rational(3, &BigRational::new(1.into(), 3.into())));
        assert!(matches!(CycloNumber::zero(5).invert(), Err(CycloError::DivisionByZero(5))));
    }

    #[test]
    fn rational_extraction() {
        let x = &z(4, 2) + &CycloNumber::from_integer(4, 2);
        assert_eq!(x.as_integer().unwrap(), BigInt::one());
        assert!(matches!(z(5, 1).as_rational(), Err(CycloError::NotRational { .. })));
        let half = CycloNumber::from_rational(7, &BigRational::new(1.into(), 2.into()));
        assert!(matches!(half.as_integer(), Err(CycloError::NotInteger(_))));
    }

    #[test]
    fn mixed_moduli_lift() {
        let s = &z(4, 1) + &z(6, 1);
        assert_eq!(s.modulus(), 12);
        assert_eq!(s, &z(12, 3) + &z(12, 2));
        assert_eq!(z(3, 1), z(6, 2));
    }

    #[test]
    fn serde_round_trip() {
        let x = &z(10, 3).scale_rational(&BigRational::new(3.into(), 7.into())) + &CycloNumber::from_integer(10, 5);
        let s = serde_json::to_string(&x).unwrap();
        let y: CycloNumber = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }

    fn arb_cyclo(n: u64) -> impl Strategy<Value = CycloNumber> {
        proptest::collection::vec((-5i64..=5, 0i64..n as i64), 0..6).prop_map(move |terms| {
            CycloNumber::from_exponents(n, terms.into_iter().map(|(c, e)| (e, c)))
        })
    }

    fn arb_pair() -> impl Strategy<Value = (CycloNumber, CycloNumber, CycloNumber, i64)> {
        prop_oneof![Just(5u64), Just(8), Just(12), Just(15), Just(21)].prop_flat_map(|n| {
            (arb_cyclo(n), arb_cyclo(n), arb_cyclo(n), (1i64..n as i64).prop_filter("unit", move |a| a.gcd(&(n as i64)) == 1))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn field_axioms((x, y, w, _a) in arb_pair()) {
            prop_assert_eq!(&(&x * &y) * &w, &x * &(&y * &w));
            prop_assert_eq!(&x * &(&y + &w), &(&x * &y) + &(&x * &w));
            prop_assert_eq!(&x + &y, &y + &x);
            prop_assert_eq!(x.conj().conj(), x.clone());
            prop_assert_eq!((&x * &y).conj(), &x.conj() * &y.conj());
            if !x.is_zero() {
                prop_assert!((&x * &x.invert().unwrap()).is_one());
            }
        }

        #[test]
        fn galois_is_a_ring_map((x, y, _w, a) in arb_pair()) {
            prop_assert_eq!((&x + &y).galois(a), &x.galois(a) + &y.galois(a));
            prop_assert_eq!((&x * &y).galois(a), &x.galois(a) * &y.galois(a));
        }

        #[test]
        fn float_shadow_tracks((x, y, w, _a) in arb_pair()) {
            let s = Shadowed::new(x).mul(&Shadowed::new(y)).add(&Shadowed::new(w)).conj();
            prop_assert!(s.drift() < 1e-9);
            if !s.exact.is_zero() {
                prop_assert!(s.invert().unwrap().drift() < 1e-9);
            }
        }
    }
}
