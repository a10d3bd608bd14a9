//! Floating-point checks of the fixed-point linear algebra behind the index
//! formulas: the 2-form on `G x G`, its restriction to fixed tori, the
//! nondegeneracy homotopy, phase factors and Clifford lifts.
//!
//! Lie algebras carry the inner product `Re tr(X^* Y)`, so `Ad` is
//! orthogonal and skew 2-forms are skew matrices.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::FixedPointError;
use crate::root_datum::{LieType, RootDatum};

pub const ABS_TOL: f64 = 1e-10;
pub const REL_TOL: f64 = 1e-8;
const CLUSTER_TOL: f64 = 1e-8;

type CMat = DMatrix<Complex64>;
type RMat = DMatrix<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixGroup {
    SU(usize),
    SO(usize),
}

impl MatrixGroup {
    pub fn size(self) -> usize {
        match self {
            MatrixGroup::SU(n) | MatrixGroup::SO(n) => n,
        }
    }

    pub fn lie_dim(self) -> usize {
        match self {
            MatrixGroup::SU(n) => n * n - 1,
            MatrixGroup::SO(n) => n * (n - 1) / 2,
        }
    }

    pub fn rank(self) -> usize {
        match self {
            MatrixGroup::SU(n) => n - 1,
            MatrixGroup::SO(n) => n / 2,
        }
    }

    pub fn num_positive_roots(self) -> usize {
        (self.lie_dim() - self.rank()) / 2
    }

    /// Orthonormal basis of the Lie algebra. For `SU(n)` the last `n-1`
    /// elements span the diagonal torus; for `SO(n)` the torus is spanned by
    /// the rotations in the planes `(2p, 2p+1)`.
    pub fn lie_basis(self) -> Vec<CMat> {
        let n = self.size();
        let s = 1.0 / 2f64.sqrt();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut x = CMat::zeros(n, n);
                x[(i, j)] = Complex64::new(s, 0.0);
                x[(j, i)] = Complex64::new(-s, 0.0);
                out.push(x);
                if let MatrixGroup::SU(_) = self {
                    let mut y = CMat::zeros(n, n);
                    y[(i, j)] = Complex64::new(0.0, s);
                    y[(j, i)] = Complex64::new(0.0, s);
                    out.push(y);
                }
            }
        }
        if let MatrixGroup::SU(_) = self {
            for m in 1..n {
                let norm = ((m * (m + 1)) as f64).sqrt();
                let mut h = CMat::zeros(n, n);
                for i in 0..m {
                    h[(i, i)] = Complex64::new(0.0, 1.0 / norm);
                }
                h[(m, m)] = Complex64::new(0.0, -(m as f64) / norm);
                out.push(h);
            }
        }
        out
    }

    /// Indices of [`lie_basis`](Self::lie_basis) spanning the Cartan subalgebra.
    pub fn torus_indices(self) -> Vec<usize> {
        let n = self.size();
        match self {
            MatrixGroup::SU(_) => (n * (n - 1)..n * n - 1).collect(),
            MatrixGroup::SO(_) => {
                let pair_index = |i: usize, j: usize| (0..i).map(|r| n - 1 - r).sum::<usize>() + (j - i - 1);
                (0..n / 2).map(|p| pair_index(2 * p, 2 * p + 1)).collect()
            }
        }
    }

    fn name(self) -> String {
        match self {
            MatrixGroup::SU(n) => format!("SU({n})"),
            MatrixGroup::SO(n) => format!("SO({n})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGroupElement {
    group: MatrixGroup,
    matrix: CMat,
}

impl MatrixGroupElement {
    pub fn new(group: MatrixGroup, matrix: CMat) -> Result<Self, FixedPointError> {
        let n = group.size();
        let unit = (&matrix.adjoint() * &matrix - CMat::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let det = (matrix.determinant() - Complex64::new(1.0, 0.0)).norm();
        let real = match group {
            MatrixGroup::SO(_) => matrix.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
            MatrixGroup::SU(_) => 0.0,
        };
        let residual = unit.max(det).max(real);
        if matrix.nrows() != n || matrix.ncols() != n || residual > 1e-12 {
            return Err(FixedPointError::NotInGroup { group: group.name(), residual });
        }
        Ok(MatrixGroupElement { group, matrix })
    }

    pub fn from_real(group: MatrixGroup, m: &RMat) -> Result<Self, FixedPointError> {
        Self::new(group, m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn identity(group: MatrixGroup) -> Self {
        let n = group.size();
        MatrixGroupElement { group, matrix: CMat::identity(n, n) }
    }

    /// Torus element with the given angles (in units of full turns). For
    /// `SU(n)` give `n-1` angles, the last entry is fixed by `det = 1`.
    pub fn torus(group: MatrixGroup, angles: &[f64]) -> Self {
        let n = group.size();
        let mut m = CMat::zeros(n, n);
        match group {
            MatrixGroup::SU(_) => {
                let last = -angles.iter().sum::<f64>();
                for (i, a) in angles.iter().chain(std::iter::once(&last)).enumerate() {
                    m[(i, i)] = Complex64::from_polar(1.0, 2.0 * PI * a);
                }
            }
            MatrixGroup::SO(_) => {
                for i in 0..n {
                    m[(i, i)] = Complex64::new(1.0, 0.0);
                }
                for (p, a) in angles.iter().enumerate() {
                    let (s, c) = (2.0 * PI * a).sin_cos();
                    m[(2 * p, 2 * p)] = Complex64::new(c, 0.0);
                    m[(2 * p, 2 * p + 1)] = Complex64::new(-s, 0.0);
                    m[(2 * p + 1, 2 * p)] = Complex64::new(s, 0.0);
                    m[(2 * p + 1, 2 * p + 1)] = Complex64::new(c, 0.0);
                }
            }
        }
        MatrixGroupElement { group, matrix: m }
    }

    /// Haar-random element.
    pub fn random<R: Rng>(group: MatrixGroup, rng: &mut R) -> Self {
        let n = group.size();
        let complex = matches!(group, MatrixGroup::SU(_));
        let g = CMat::from_fn(n, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
            Complex64::new(re, im)
        });
        let qr = g.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
        let det = q.determinant();
        match group {
            MatrixGroup::SU(_) => {
                let fix = Complex64::from_polar(1.0, -det.arg() / n as f64);
                q *= fix;
            }
            MatrixGroup::SO(_) => {
                if det.re < 0.0 {
                    for i in 0..n {
                        q[(i, 0)] = -q[(i, 0)];
                    }
                }
            }
        }
        MatrixGroupElement { group, matrix: q }
    }

    pub fn group(&self) -> MatrixGroup {
        self.group
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn mul(&self, o: &Self) -> Self {
        MatrixGroupElement { group: self.group, matrix: &self.matrix * &o.matrix }
    }

    pub fn inverse(&self) -> Self {
        MatrixGroupElement { group: self.group, matrix: self.matrix.adjoint() }
    }
}

/// Matrix of `Ad_g` in the orthonormal basis of the Lie algebra.
pub fn adjoint_rep(g: &MatrixGroupElement) -> RMat {
    let basis = g.group.lie_basis();
    let m = basis.len();
    let ginv = g.matrix.adjoint();
    let images: Vec<CMat> = basis.iter().map(|x| &g.matrix * x * &ginv).collect();
    RMat::from_fn(m, m, |a, b| (basis[a].adjoint() * &images[b]).trace().re)
}

/// Blocks of the 2-form at `(a, b)` in left trivialization.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoFormMatrix {
    pub c11: RMat,
    pub c12: RMat,
    pub c21: RMat,
    pub c22: RMat,
}

impl TwoFormMatrix {
    /// From `Ad_a`, `Ad_b` and their inverses, in any basis.
    pub fn from_actions(ad_a: &RMat, ad_a_inv: &RMat, ad_b: &RMat, ad_b_inv: &RMat) -> Self {
        let n = ad_a.nrows();
        let id = RMat::identity(n, n);
        TwoFormMatrix {
            c11: (ad_b - ad_b_inv) * 0.5,
            c12: (-&id + ad_b + ad_a_inv + ad_b * ad_a_inv) * 0.5,
            c21: (&id - ad_a - ad_b_inv - ad_a * ad_b_inv) * 0.5,
            c22: (ad_a_inv - ad_a) * 0.5,
        }
    }

    pub fn dim(&self) -> usize {
        self.c11.nrows()
    }

    pub fn full(&self) -> RMat {
        let n = self.dim();
        let mut c = RMat::zeros(2 * n, 2 * n);
        c.view_mut((0, 0), (n, n)).copy_from(&self.c11);
        c.view_mut((0, n), (n, n)).copy_from(&self.c12);
        c.view_mut((n, 0), (n, n)).copy_from(&self.c21);
        c.view_mut((n, n), (n, n)).copy_from(&self.c22);
        c
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let c = self.full();
        (&c + c.transpose()).amax()
    }

    /// Compress every block to the span of the orthonormal columns of `q`.
    pub fn restrict(&self, q: &RMat) -> TwoFormMatrix {
        let r = |m: &RMat| q.transpose() * m * q;
        TwoFormMatrix { c11: r(&self.c11), c12: r(&self.c12), c21: r(&self.c21), c22: r(&self.c22) }
    }

    /// Restrict to coordinate indices (blocks must preserve their span).
    pub fn select(&self, idx: &[usize]) -> TwoFormMatrix {
        let s = |m: &RMat| RMat::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]);
        TwoFormMatrix { c11: s(&self.c11), c12: s(&self.c12), c21: s(&self.c21), c22: s(&self.c22) }
    }

    /// `C_21 - C_12`.
    pub fn symmetric_part(&self) -> RMat {
        &self.c21 - &self.c12
    }
}

pub fn two_form_at(a: &MatrixGroupElement, b: &MatrixGroupElement) -> Result<TwoFormMatrix, FixedPointError> {
    if a.group != b.group {
        return Err(FixedPointError::GroupMismatch);
    }
    let (aa, ab) = (adjoint_rep(a), adjoint_rep(b));
    Ok(TwoFormMatrix::from_actions(&aa, &aa.transpose(), &ab, &ab.transpose()))
}

fn commutator_residual(x: &RMat, y: &RMat) -> f64 {
    (x * y - y * x).amax()
}

/// `|| C11 C22 - C12 C21 - 1 ||` for the torus restriction built from two
/// commuting Weyl group matrices.
pub fn torus_det_check(w1: &RMat, w2: &RMat) -> Result<f64, FixedPointError> {
    let comm = commutator_residual(w1, w2);
    if comm > ABS_TOL {
        return Err(FixedPointError::NonCommuting(comm));
    }
    let inv = |w: &RMat| w.clone().try_inverse().ok_or(FixedPointError::Clustering("singular Weyl matrix".into()));
    let ct = TwoFormMatrix::from_actions(w1, &inv(w1)?, w2, &inv(w2)?);
    let n = w1.nrows();
    Ok((&ct.c11 * &ct.c22 - &ct.c12 * &ct.c21 - RMat::identity(n, n)).amax())
}

/// Weyl matrices of the center in weight coordinates, as floats.
pub fn center_weyl_matrices(d: &RootDatum) -> Vec<RMat> {
    let r = d.rank();
    (0..d.center_order())
        .map(|g| {
            let (m, _) = d.center_alcove_map(g);
            RMat::from_fn(r, r, |i, j| m[i][j] as f64)
        })
        .collect()
}

/// The Weyl pair `(w_1, w_2)` of the `D_N` lift construction on `R^N`.
pub fn dn_weyl_pair(n: usize) -> (RMat, RMat) {
    let mut w1 = RMat::identity(n, n);
    w1[(0, 0)] = -1.0;
    w1[(n - 1, n - 1)] = -1.0;
    let w2 = RMat::from_fn(n, n, |i, j| if i + j == n - 1 { -1.0 } else { 0.0 });
    (w1, w2)
}

fn orthonormal_range(p: &RMat) -> Result<RMat, FixedPointError> {
    let n = p.nrows();
    let eig = p.clone().symmetric_eigen();
    let mut cols = Vec::new();
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        if (v - 1.0).abs() < CLUSTER_TOL {
            cols.push(eig.eigenvectors.column(i).into_owned());
        } else if v.abs() > CLUSTER_TOL {
            return Err(FixedPointError::Clustering(format!("projector eigenvalue {v}")));
        }
    }
    Ok(if cols.is_empty() { RMat::zeros(n, 0) } else { RMat::from_columns(&cols) })
}

fn null_projector(m: &RMat) -> Result<RMat, FixedPointError> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let mut p = RMat::zeros(n, n);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.resize(vt.nrows(), 0.0);
    for (i, &s) in sv.iter().enumerate() {
        if s < CLUSTER_TOL {
            let v = vt.row(i).transpose();
            p += &v * v.transpose();
        } else if s < 1e-4 {
            return Err(FixedPointError::Clustering(format!("singular value {s} near the threshold")));
        }
    }
    if vt.nrows() < n {
        return Err(FixedPointError::Clustering("rank-deficient decomposition".into()));
    }
    Ok(p)
}

/// Orthonormal bases of `k` (joint eigenvalues `(-1,1)`, `(-1,-1)`, `(1,-1)`)
/// and of its complement.
pub fn split_k(ad_a: &RMat, ad_b: &RMat) -> Result<(RMat, RMat), FixedPointError> {
    let n = ad_a.nrows();
    let id = RMat::identity(n, n);
    let stack = |x: RMat, y: RMat| {
        let mut s = RMat::zeros(2 * n, n);
        s.view_mut((0, 0), (n, n)).copy_from(&x);
        s.view_mut((n, 0), (n, n)).copy_from(&y);
        s
    };
    let involutive = null_projector(&stack(ad_a - ad_a.transpose(), ad_b - ad_b.transpose()))?;
    let trivial = null_projector(&stack(ad_a - &id, ad_b - &id))?;
    let pk = &involutive - &trivial;
    let k = orthonormal_range(&pk)?;
    let kperp = orthonormal_range(&(&id - &pk))?;
    Ok((k, kperp))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenBound {
    /// Largest eigenvalue of `C_21 - C_12` on `k^perp`.
    pub max_eigenvalue: f64,
    /// `max(|C_11|_k|, |C_22|_k|, |C_12|_k + 1|, |C_21|_k - 1|)`.
    pub k_block_residual: f64,
    pub dim_k: usize,
}

pub fn eigenvalue_bound_check(a: &MatrixGroupElement, b: &MatrixGroupElement) -> Result<EigenBound, FixedPointError> {
    let c = two_form_at(a, b)?;
    let (ad_a, ad_b) = (adjoint_rep(a), adjoint_rep(b));
    let comm = commutator_residual(&ad_a, &ad_b);
    if comm > ABS_TOL {
        return Err(FixedPointError::NonCommuting(comm));
    }
    let (k, kperp) = split_k(&ad_a, &ad_b)?;
    let max_eigenvalue = if kperp.ncols() == 0 {
        f64::NEG_INFINITY
    } else {
        let s = kperp.transpose() * c.symmetric_part() * &kperp;
        s.symmetric_eigen().eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    let k_block_residual = if k.ncols() == 0 {
        0.0
    } else {
        let ck = c.restrict(&k);
        let id = RMat::identity(k.ncols(), k.ncols());
        [ck.c11.amax(), ck.c22.amax(), (&ck.c12 + &id).amax(), (&ck.c21 - &id).amax()]
            .into_iter()
            .fold(0.0, f64::max)
    };
    Ok(EigenBound { max_eigenvalue, k_block_residual, dim_k: k.ncols() })
}

/// The scalar form of the bound on a joint rotation plane.
pub fn scalar_bound(psi_a: f64, psi_b: f64) -> f64 {
    1.0 - psi_a.cos() - psi_b.cos() - (psi_a - psi_b).cos()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopyReport {
    /// Smallest `|det C_s|` on the grid, or 0 if the path provably
    /// degenerates between grid points.
    pub min_abs_det: f64,
    /// Some eigenvalue of `C_21 - C_12` on `k^perp` is `>= 2`, so the
    /// determinant `prod (1 - (s - s^2)(2 + m))` vanishes somewhere in `[0, 1]`.
    pub crosses_zero: bool,
    /// Largest relative gap between the direct block determinant and
    /// `det((s^2 - s)(2 + C_21 - C_12) + 1)`.
    pub identity_residual: f64,
}

pub fn homotopy_nondegeneracy(a: &MatrixGroupElement, b: &MatrixGroupElement, grid: &[f64]) -> Result<HomotopyReport, FixedPointError> {
    let c = two_form_at(a, b)?;
    let (_, kperp) = split_k(&adjoint_rep(a), &adjoint_rep(b))?;
    let cp = c.restrict(&kperp);
    let m = cp.dim();
    let full = cp.full();
    let mut c0 = RMat::zeros(2 * m, 2 * m);
    c0.view_mut((0, m), (m, m)).fill_with_identity();
    c0.view_mut((m, 0), (m, m)).copy_from(&(-RMat::identity(m, m)));
    let sym = cp.symmetric_part();
    let id = RMat::identity(m, m);
    let mut min_abs_det = f64::INFINITY;
    let mut identity_residual: f64 = 0.0;
    for &s in grid {
        let direct = (&c0 * (1.0 - s) + &full * s).determinant();
        let formula = ((&id * 2.0 + &sym) * (s * s - s) + &id).determinant();
        min_abs_det = min_abs_det.min(direct.abs());
        identity_residual = identity_residual.max((direct - formula).abs() / direct.abs().max(1.0));
    }
    let crosses_zero = m > 0 && sym.symmetric_eigen().eigenvalues.iter().any(|&x| x >= 2.0);
    if crosses_zero {
        min_abs_det = 0.0;
    }
    Ok(HomotopyReport { min_abs_det, crosses_zero, identity_residual })
}

/// A complex structure compatible with the 2-form `c` and the metric `g`
/// (both in the same basis), by polar decomposition.
pub fn compatible_complex_structure(c: &RMat, g: &RMat) -> Result<RMat, FixedPointError> {
    let eig = g.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&v| v <= 0.0) {
        return Err(FixedPointError::Clustering("metric is not positive definite".into()));
    }
    let v = &eig.eigenvectors;
    let half = v * RMat::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * v.transpose();
    let inv_half = v * RMat::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt())) * v.transpose();
    let cp = &inv_half * c * &inv_half;
    let sq = (cp.transpose() * &cp).symmetric_eigen();
    if sq.eigenvalues.iter().any(|&x| x < CLUSTER_TOL) {
        return Err(FixedPointError::Clustering("degenerate 2-form".into()));
    }
    let w = &sq.eigenvectors;
    let root_inv = w * RMat::from_diagonal(&sq.eigenvalues.map(|x| 1.0 / x.sqrt())) * w.transpose();
    let jp = -(&cp * root_inv);
    Ok(&inv_half * jp * &half)
}

/// Singular values of `A - 1` below this mark the fixed space of `A`.
const FIXED_TOL: f64 = 1e-7;

/// `det(A^{1/2})` for `A` acting complex-linearly with respect to `j`,
/// using the square root with eigenvalues `e^{i phi}`, `0 <= phi < pi`.
pub fn phase_factor(a: &RMat, j: &RMat) -> Result<Complex64, FixedPointError> {
    let n2 = a.nrows();
    let comm = commutator_residual(a, j);
    if comm > 1e-8 {
        return Err(FixedPointError::NonCommuting(comm));
    }
    let i = Complex64::new(0.0, 1.0);
    let proj = CMat::identity(n2, n2) - j.map(|x| Complex64::new(x, 0.0)) * i;
    // orthonormal basis of the range through the Hermitian P P^*, whose
    // eigensolver stays accurate on the heavily repeated nonzero eigenvalue
    let eig = (&proj * proj.adjoint()).symmetric_eigen();
    let mut order: Vec<usize> = (0..n2).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let cols: Vec<DVector<Complex64>> = order[..n2 / 2].iter().map(|&c| eig.eigenvectors.column(c).into_owned()).collect();
    let basis = CMat::from_columns(&cols);
    let aw = basis.adjoint() * a.map(|x| Complex64::new(x, 0.0)) * &basis;
    // aw is unitary, so the singular values of aw - 1 are |z - 1|; split off
    // the fixed space exactly, since Schur iteration smears repeated eigenvalues
    let m = aw.nrows();
    let shifted = &aw - CMat::identity(m, m);
    let sv = shifted.svd(false, true);
    let v_t = sv.v_t.expect("requested right singular vectors");
    let moving: Vec<DVector<Complex64>> =
        (0..m).filter(|&r| sv.singular_values[r] > FIXED_TOL).map(|r| v_t.row(r).adjoint()).collect();
    if moving.is_empty() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let comp = CMat::from_columns(&moving);
    let reduced = comp.adjoint() * &aw * &comp;
    let eigs = reduced
        .eigenvalues()
        .ok_or_else(|| FixedPointError::Clustering("complex Schur form did not converge".into()))?;
    let mut out = Complex64::new(1.0, 0.0);
    for z in eigs.iter() {
        let mut arg = z.arg();
        if arg < 0.0 {
            arg += 2.0 * PI;
        }
        if !(1e-4..=2.0 * PI - 1e-4).contains(&arg) {
            return Err(FixedPointError::BranchCut(arg));
        }
        out *= Complex64::from_polar(1.0, arg / 2.0);
    }
    Ok(out)
}

fn block_diag2(x: &RMat) -> RMat {
    let n = x.nrows();
    let mut m = RMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(x);
    m.view_mut((n, n), (n, n)).copy_from(x);
    m
}

/// Which compatible complex structure to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComplexStructure {
    /// Polar part of the 2-form for the standard metric.
    Standard,
    /// Polar part for the metric `diag(P, P)`, `P = 2 + (Ad_t + Ad_t^T)/2`.
    Twisted,
}

/// Phase of `t` acting on `T_{(a,b)}(G x G)` with the 2-form at `(a, b)`.
pub fn fixed_point_phase(
    a: &MatrixGroupElement,
    b: &MatrixGroupElement,
    t: &MatrixGroupElement,
    structure: ComplexStructure,
) -> Result<Complex64, FixedPointError> {
    let c = two_form_at(a, b)?.full();
    let ad_t = adjoint_rep(t);
    let action = block_diag2(&ad_t);
    let n = ad_t.nrows();
    let metric = match structure {
        ComplexStructure::Standard => RMat::identity(2 * n, 2 * n),
        ComplexStructure::Twisted => {
            block_diag2(&(RMat::identity(n, n) * 2.0 + (&ad_t + ad_t.transpose()) * 0.5))
        }
    };
    let j = compatible_complex_structure(&c, &metric)?;
    phase_factor(&action, &j)
}

/// Pfaffian of a skew matrix by skew Gaussian elimination.
pub fn pfaffian(m: &RMat) -> f64 {
    let n = m.nrows();
    if n % 2 == 1 {
        return 0.0;
    }
    let mut a = m.clone();
    let mut pf = 1.0;
    for k in (0..n).step_by(2) {
        let p = (k + 1..n).max_by(|&x, &y| a[(k, x)].abs().total_cmp(&a[(k, y)].abs())).expect("nonempty");
        if p != k + 1 {
            a.swap_rows(k + 1, p);
            a.swap_columns(k + 1, p);
            pf = -pf;
        }
        let piv = a[(k, k + 1)];
        if piv == 0.0 {
            return 0.0;
        }
        pf *= piv;
        for i in k + 2..n {
            let f = a[(k, i)] / piv;
            if f != 0.0 {
                let col = a.column(k + 1).into_owned();
                let mut ci = a.column_mut(i);
                ci -= &col * f;
                let row = a.row(k + 1).into_owned();
                let mut ri = a.row_mut(i);
                ri -= &row * f;
            }
        }
    }
    pf
}

/// Interleave the block matrix so that coordinates read `(x_1, y_1, x_2, y_2, ...)`.
pub fn interleave(c: &TwoFormMatrix) -> RMat {
    let n = c.dim();
    let full = c.full();
    let idx = |i: usize| if i.is_multiple_of(2) { i / 2 } else { n + i / 2 };
    RMat::from_fn(2 * n, 2 * n, |i, j| full[(idx(i), idx(j))])
}

/// A component of the fixed-point set: lifts `n_1, n_2` of commuting Weyl
/// elements; points are `(n_1 s, n_2 u)` with `s, u` in the torus.
#[derive(Clone, Debug)]
pub struct WeylPairModel {
    pub name: String,
    pub n1: MatrixGroupElement,
    pub n2: MatrixGroupElement,
}

impl WeylPairModel {
    pub fn identity(group: MatrixGroup) -> Self {
        WeylPairModel {
            name: format!("{} trivial", group.name()),
            n1: MatrixGroupElement::identity(group),
            n2: MatrixGroupElement::identity(group),
        }
    }

    /// `SU(n)` with lifts of `phi(gamma^e1)`, `phi(gamma^e2)`, `gamma` a
    /// generator of the center, realised by powers of a scaled cyclic shift.
    pub fn su_center(n: usize, e1: usize, e2: usize) -> Self {
        let group = MatrixGroup::SU(n);
        let shift = cyclic_lift(n);
        let pow = |e: usize| (0..e).fold(MatrixGroupElement::identity(group), |acc, _| acc.mul(&shift));
        WeylPairModel { name: format!("SU({n}) center ({e1},{e2})"), n1: pow(e1), n2: pow(e2) }
    }

    /// `SO(2N)` with the commuting lifts `g'_1, g'_2` of the `D_N` pair.
    pub fn so_even_pair(n: usize) -> Self {
        let (g1, g2) = so_lifts(n);
        let group = MatrixGroup::SO(2 * n);
        WeylPairModel {
            name: format!("SO({}) lift pair", 2 * n),
            n1: MatrixGroupElement::from_real(group, &g1).expect("orthogonal"),
            n2: MatrixGroupElement::from_real(group, &g2).expect("orthogonal"),
        }
    }

    pub fn group(&self) -> MatrixGroup {
        self.n1.group
    }

    /// `C^T` at the point `(n_1 s, n_2 u)`.
    pub fn torus_form(&self, s: &[f64], u: &[f64]) -> Result<TwoFormMatrix, FixedPointError> {
        let g = self.group();
        let a = self.n1.mul(&MatrixGroupElement::torus(g, s));
        let b = self.n2.mul(&MatrixGroupElement::torus(g, u));
        Ok(two_form_at(&a, &b)?.select(&g.torus_indices()))
    }
}

fn cyclic_lift(n: usize) -> MatrixGroupElement {
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        m[((i + 1) % n, i)] = Complex64::new(1.0, 0.0);
    }
    let sign = if n.is_multiple_of(2) { -1.0 } else { 1.0 };
    let scale = Complex64::from_polar(1.0, if sign < 0.0 { PI / n as f64 } else { 0.0 });
    MatrixGroupElement::new(MatrixGroup::SU(n), m * scale).expect("determinant one")
}

/// `g'_1, g'_2` in `SO(2N)`.
pub fn so_lifts(n: usize) -> (RMat, RMat) {
    let dim = 2 * n;
    let mut g1 = RMat::identity(dim, dim);
    g1[(1, 1)] = -1.0;
    g1[(dim - 1, dim - 1)] = -1.0;
    let mut g2 = RMat::zeros(dim, dim);
    for p in 0..n {
        let (o1, o2) = (2 * p, 2 * p + 1);
        if p + 1 < n {
            let q = n - 1 - p;
            g2[(o1, 2 * q)] = 1.0;
            g2[(o2, 2 * q + 1)] = -1.0;
        } else {
            g2[(o1, 0)] = -1.0;
            g2[(o2, 1)] = 1.0;
        }
    }
    (g1, g2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionReport {
    pub model: String,
    pub samples: usize,
    /// Largest `| |Pf(C^T)| - 1 |`.
    pub max_error: f64,
    /// Largest `|C11 C22 - C12 C21 - 1|` seen at the samples.
    pub max_det_residual: f64,
    /// Sign of the Pfaffian in the interleaved orientation, if constant.
    pub sign: Option<i8>,
}

/// Symplectic volume density of a fixed torus relative to the Riemannian one,
/// sampled at random torus points.
pub fn fusion_volume_check(model: &WeylPairModel, samples: usize, seed: u64) -> Result<FusionReport, FixedPointError> {
    let r = model.group().rank();
    let results: Vec<Result<(f64, f64), FixedPointError>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let s: Vec<f64> = (0..r).map(|_| rng.random()).collect();
            let u: Vec<f64> = (0..r).map(|_| rng.random()).collect();
            let ct = model.torus_form(&s, &u)?;
            let id = RMat::identity(r, r);
            let det = (&ct.c11 * &ct.c22 - &ct.c12 * &ct.c21 - id).amax();
            Ok((pfaffian(&interleave(&ct)), det))
        })
        .collect();
    let mut max_error: f64 = 0.0;
    let mut max_det_residual: f64 = 0.0;
    let mut signs = Vec::new();
    for res in results {
        let (pf, det) = res?;
        max_error = max_error.max((pf.abs() - 1.0).abs());
        max_det_residual = max_det_residual.max(det);
        signs.push(if pf > 0.0 { 1i8 } else { -1 });
    }
    signs.dedup();
    let sign = if signs.len() == 1 { Some(signs[0]) } else { None };
    Ok(FusionReport { model: model.name.clone(), samples, max_error, max_det_residual, sign })
}

/// Independent stream `i` of a seeded ChaCha generator.
pub fn sample_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

/// Random torus element of `group` with all root angles at least `margin`
/// (in turns) away from integers and from half-integers.
pub fn random_regular_torus<R: Rng>(group: MatrixGroup, rng: &mut R, margin: f64) -> MatrixGroupElement {
    loop {
        let angles: Vec<f64> = (0..group.rank()).map(|_| rng.random()).collect();
        let t = MatrixGroupElement::torus(group, &angles);
        let ad = adjoint_rep(&t);
        let eig = ad.complex_eigenvalues();
        let ok = eig.iter().filter(|z| (**z - Complex64::new(1.0, 0.0)).norm() > 1e-9).count() == group.lie_dim() - group.rank()
            && eig.iter().all(|z| {
                let turns = z.arg().abs() / (2.0 * PI);
                turns < 1e-12 || (turns > margin && (turns - 0.5).abs() > margin)
            });
        if ok {
            return t;
        }
    }
}

// ---------------------------------------------------------------------------
// Clifford algebra

/// A basis blade `e_{i_1} ... e_{i_m}` as a bitmask, with `e_i^2 = +1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CliffordBlade {
    pub mask: u16,
    pub sign: i8,
}

impl CliffordBlade {
    pub fn new(indices: &[usize]) -> Self {
        let mut b = CliffordBlade { mask: 0, sign: 1 };
        for &i in indices {
            b = b.mul(&CliffordBlade { mask: 1 << i, sign: 1 });
        }
        b
    }

    pub fn grade(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut a = self.mask >> 1;
        let mut swaps = 0;
        while a != 0 {
            swaps += (a & o.mask).count_ones();
            a >>= 1;
        }
        let sign = if swaps % 2 == 0 { 1 } else { -1 };
        CliffordBlade { mask: self.mask ^ o.mask, sign: self.sign * o.sign * sign }
    }

    pub fn commutes_with(&self, o: &Self) -> bool {
        self.mul(o) == o.mul(self)
    }
}

/// Real linear combination of blades.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Multivector(pub BTreeMap<u16, f64>);

impl Multivector {
    pub fn scalar(x: f64) -> Self {
        Multivector(BTreeMap::from([(0, x)]))
    }

    pub fn vector(v: &[f64]) -> Self {
        Multivector(v.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(i, &x)| (1u16 << i, x)).collect())
    }

    pub fn blade(b: CliffordBlade) -> Self {
        Multivector(BTreeMap::from([(b.mask, b.sign as f64)]))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out: BTreeMap<u16, f64> = BTreeMap::new();
        for (&ma, &xa) in &self.0 {
            for (&mb, &xb) in &o.0 {
                let p = CliffordBlade { mask: ma, sign: 1 }.mul(&CliffordBlade { mask: mb, sign: 1 });
                *out.entry(p.mask).or_insert(0.0) += xa * xb * p.sign as f64;
            }
        }
        out.retain(|_, x| x.abs() > 1e-15);
        Multivector(out)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.0.clone();
        for (&m, &x) in &o.0 {
            *out.entry(m).or_insert(0.0) -= x;
        }
        out.retain(|_, x| x.abs() > 1e-15);
        Multivector(out)
    }

    pub fn neg(&self) -> Self {
        Multivector(self.0.iter().map(|(&m, &x)| (m, -x)).collect())
    }

    /// Reversion; the inverse of a product of unit vectors.
    pub fn reverse(&self) -> Self {
        Multivector(
            self.0
                .iter()
                .map(|(&m, &x)| {
                    let g = m.count_ones();
                    (m, if (g * (g.saturating_sub(1)) / 2) % 2 == 0 { x } else { -x })
                })
                .collect(),
        )
    }

    pub fn norm_max(&self) -> f64 {
        self.0.values().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn is_even(&self) -> bool {
        self.0.keys().all(|m| m.count_ones() % 2 == 0)
    }
}

/// A lift of `g` in `SO(n)` to `Spin(n)` as a product of unit vectors, from
/// a decomposition of `g` into reflections.
pub fn spin_lift(g: &RMat) -> Multivector {
    let n = g.nrows();
    let mut cur = g.clone();
    let mut refl: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        let v = cur.column(i).into_owned();
        if (&v - &e).amax() < 1e-12 {
            continue;
        }
        let u = if (&v + &e).amax() < 1e-12 { e.clone() } else { (&v - &e).normalize() };
        let r = RMat::identity(n, n) - &u * u.transpose() * 2.0;
        cur = r * cur;
        refl.push(u);
    }
    refl.iter().fold(Multivector::scalar(1.0), |acc, u| acc.mul(&Multivector::vector(u.as_slice())))
}

/// `max_i |g e_i g^{-1} - M e_i|` for a lift `g` of `m`.
pub fn lift_residual(g: &Multivector, m: &RMat) -> f64 {
    let n = m.nrows();
    let ginv = g.reverse();
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let img = g.mul(&Multivector::vector(&e)).mul(&ginv);
            let expect = Multivector::vector(m.column(i).as_slice());
            img.sub(&expect).norm_max()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliffordReport {
    pub n: usize,
    pub so_commutator: f64,
    pub lift_residual: f64,
    /// Commutator norm for each sign choice `(+,+), (+,-), (-,+), (-,-)`.
    pub spin_commutators: Vec<f64>,
    pub even: bool,
}

impl CliffordReport {
    pub fn commute(&self) -> bool {
        self.even
            && self.so_commutator < ABS_TOL
            && self.lift_residual < ABS_TOL
            && self.spin_commutators.iter().all(|&c| c < ABS_TOL)
    }
}

pub fn clifford_lifts(n: usize) -> Result<CliffordReport, FixedPointError> {
    if n % 2 == 1 {
        return Err(FixedPointError::OddRank(n));
    }
    if n > 8 {
        return Err(FixedPointError::RankCap(n));
    }
    let (g1, g2) = so_lifts(n);
    let so_commutator = commutator_residual(&g1, &g2);
    let (l1, l2) = (spin_lift(&g1), spin_lift(&g2));
    let lift_residual = lift_residual(&l1, &g1).max(lift_residual(&l2, &g2));
    let mut spin_commutators = Vec::new();
    for s1 in [false, true] {
        for s2 in [false, true] {
            let a = if s1 { l1.neg() } else { l1.clone() };
            let b = if s2 { l2.neg() } else { l2.clone() };
            spin_commutators.push(a.mul(&b).sub(&b.mul(&a)).norm_max());
        }
    }
    Ok(CliffordReport { n, so_commutator, lift_residual, spin_commutators, even: l1.is_even() && l2.is_even() })
}

/// Whether the lifts of `g'_1, g'_2` to `Spin(2N)` commute for every sign choice.
pub fn clifford_lift_commutes(n: usize) -> Result<bool, FixedPointError> {
    Ok(clifford_lifts(n)?.commute())
}

// ---------------------------------------------------------------------------
// Fixed points of the moment map

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub pairs: usize,
    pub samples_per_pair: usize,
    /// Smallest `|| t_{l1} - a t_{l2} a^{-1} ||_F` seen.
    pub min_distance: f64,
    /// Alcove representatives whose exponential failed to match the class.
    pub alcove_mismatches: usize,
    /// Distinct alcove points sharing a spectrum.
    pub alcove_collisions: usize,
}

fn special_element_su(d: &RootDatum, k: u32, lam: &crate::root_datum::WeightVector) -> MatrixGroupElement {
    let n = d.rank() + 1;
    let shifted: Vec<i64> = lam.0.iter().map(|x| x + 1).collect();
    let amb = d.weight_to_ambient(&crate::root_datum::WeightVector(shifted));
    let l = (k + d.dual_coxeter()) as f64;
    let xs: Vec<f64> = amb.iter().map(|x| x.to_f64().unwrap_or(f64::NAN) / l).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let angles: Vec<f64> = xs.iter().take(n - 1).map(|x| x - mean).collect();
    MatrixGroupElement::torus(MatrixGroup::SU(n), &angles)
}

fn spectrum_key(angles: &[f64]) -> Vec<i64> {
    let mut v: Vec<i64> = angles.iter().map(|a| ((a.rem_euclid(1.0)) * 1e6).round() as i64 % 1_000_000).collect();
    v.sort_unstable();
    v
}

/// Random search for solutions of `t_{l1} = Ad_a t_{l2}` with `l1 != l2`,
/// plus the check that conjugacy classes meet `exp(A)` once, for `SU(n)`.
pub fn moment_map_probe(n: usize, k: u32, samples: usize, seed: u64) -> ProbeReport {
    let t = LieType::new(crate::root_datum::Family::A, n - 1).expect("valid type");
    let d = RootDatum::new(t);
    let ws = d.level_weights(k);
    let mut pairs = Vec::new();
    for (i, a) in ws.iter().enumerate() {
        for b in ws.iter().skip(i + 1) {
            pairs.push((a.clone(), b.clone()));
        }
    }
    pairs.truncate(6);
    let group = MatrixGroup::SU(n);
    let min_distance = pairs
        .par_iter()
        .enumerate()
        .map(|(pi, (l1, l2))| {
            let t1 = special_element_su(&d, k, l1);
            let t2 = special_element_su(&d, k, l2);
            let mut rng = sample_rng(seed, pi as u64);
            (0..samples)
                .map(|_| {
                    let a = MatrixGroupElement::random(group, &mut rng);
                    (t1.matrix() - a.matrix() * t2.matrix() * a.matrix().adjoint()).norm()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);

    let mut rng = sample_rng(seed, u64::MAX);
    let mut mismatches = 0;
    let mut seen: BTreeMap<Vec<i64>, Vec<BigRational>> = BTreeMap::new();
    let mut collisions = 0;
    for _ in 0..200 {
        let raw: Vec<i64> = (0..n).map(|_| rng.random_range(-300..300)).collect();
        let mean: i64 = raw.iter().sum::<i64>();
        let xi: Vec<BigRational> = raw
            .iter()
            .map(|&x| BigRational::new((x * n as i64 - mean).into(), (97 * n as i64).into()))
            .collect();
        let red = d.affine_reduce(&xi);
        let f = |v: &[BigRational]| v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>();
        let (orig, alc) = (f(&xi), f(&red.reduced));
        if spectrum_key(&orig) != spectrum_key(&alc) {
            mismatches += 1;
        }
        let key = spectrum_key(&alc);
        match seen.get(&key) {
            Some(prev) if *prev != red.reduced => collisions += 1,
            _ => {
                seen.insert(key, red.reduced.clone());
            }
        }
    }
    ProbeReport { pairs: pairs.len(), samples_per_pair: samples, min_distance, alcove_mismatches: mismatches, alcove_collisions: collisions }
}

// ---------------------------------------------------------------------------
// Report

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub checks: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, samples: usize, value: f64, threshold: f64, below: bool) {
        let passed = if below { value <= threshold } else { value > threshold };
        self.checks.push(CheckEntry { name: name.into(), samples, max_residual: value, threshold, passed });
    }
}

/// Sample sizes for [`run_suite`].
#[derive(Clone, Copy, Debug)]
pub struct SuiteSize {
    pub eigen_samples: usize,
    pub phase_samples: usize,
    pub fusion_samples: usize,
    pub probe_samples: usize,
}

impl SuiteSize {
    pub const FAST: SuiteSize = SuiteSize { eigen_samples: 500, phase_samples: 20, fusion_samples: 200, probe_samples: 2_000 };
    pub const FULL: SuiteSize = SuiteSize { eigen_samples: 10_000, phase_samples: 100, fusion_samples: 1_000, probe_samples: 100_000 };
}

fn random_torus_pair(group: MatrixGroup, rng: &mut ChaCha8Rng) -> (MatrixGroupElement, MatrixGroupElement) {
    let r = group.rank();
    let s: Vec<f64> = (0..r).map(|_| rng.random()).collect();
    let u: Vec<f64> = (0..r).map(|_| rng.random()).collect();
    (MatrixGroupElement::torus(group, &s), MatrixGroupElement::torus(group, &u))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSweep {
    pub samples: usize,
    pub max_eigenvalue: f64,
    pub max_k_residual: f64,
    /// Samples whose largest eigenvalue is not below 2.
    pub violations: usize,
}

/// Torus-pair eigenvalue bound over `samples` draws in `group`.
pub fn eigen_bound_sweep(group: MatrixGroup, samples: usize, seed: u64) -> Result<BoundSweep, FixedPointError> {
    let res: Vec<Result<EigenBound, FixedPointError>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let (a, b) = random_torus_pair(group, &mut rng);
            eigenvalue_bound_check(&a, &b)
        })
        .collect();
    let mut out = BoundSweep { samples, max_eigenvalue: f64::NEG_INFINITY, max_k_residual: 0.0, violations: 0 };
    for r in res {
        let r = r?;
        out.max_eigenvalue = out.max_eigenvalue.max(r.max_eigenvalue);
        out.max_k_residual = out.max_k_residual.max(r.k_block_residual);
        if r.max_eigenvalue >= 2.0 - 1e-9 {
            out.violations += 1;
        }
    }
    Ok(out)
}

/// Largest `|phase - (-1)^{#R_+}|` over tangent and torus-pair models.
pub fn phase_sweep(group: MatrixGroup, samples: usize, seed: u64) -> Result<f64, FixedPointError> {
    let expect = if group.num_positive_roots().is_multiple_of(2) { 1.0 } else { -1.0 };
    let res: Vec<Result<f64, FixedPointError>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let t = random_regular_torus(group, &mut rng, 1e-3);
            let e = MatrixGroupElement::identity(group);
            let mut worst: f64 = 0.0;
            for structure in [ComplexStructure::Standard, ComplexStructure::Twisted] {
                let p = fixed_point_phase(&e, &e, &t, structure)?;
                worst = worst.max((p - Complex64::new(expect, 0.0)).norm());
            }
            Ok(worst)
        })
        .collect();
    res.into_iter().try_fold(0.0, |acc: f64, r| Ok(acc.max(r?)))
}

/// Runs every numeric check and collects residuals.
pub fn run_suite(size: SuiteSize, seed: u64) -> Result<VerificationReport, FixedPointError> {
    let mut rep = VerificationReport { seed, checks: Vec::new() };

    let mut det_res: f64 = 0.0;
    let mut det_count = 0;
    for t in ["A1", "A2", "A3", "B2", "D4", "E6"] {
        let d = RootDatum::new(t.parse().expect("valid type"));
        let ws = center_weyl_matrices(&d);
        for w1 in &ws {
            for w2 in &ws {
                det_res = det_res.max(torus_det_check(w1, w2)?);
                det_count += 1;
            }
        }
    }
    for n in [4, 6, 8] {
        let (w1, w2) = dn_weyl_pair(n);
        det_res = det_res.max(torus_det_check(&w1, &w2)?);
        det_count += 1;
    }
    rep.push("torus determinant C11 C22 - C12 C21 = 1", det_count, det_res, ABS_TOL, true);

    for (i, group) in [MatrixGroup::SU(2), MatrixGroup::SU(3)].into_iter().enumerate() {
        let b = eigen_bound_sweep(group, size.eigen_samples, seed.wrapping_add(10 + i as u64))?;
        rep.push(&format!("{} eigenvalue bound < 2", group.name()), size.eigen_samples, b.max_eigenvalue, 2.0 - 1e-9, true);
        rep.push(&format!("{} k-block standard form", group.name()), size.eigen_samples, b.max_k_residual, ABS_TOL, true);
    }
    {
        let p = WeylPairModel::su_center(3, 1, 1);
        let b = eigenvalue_bound_check(&p.n1, &p.n2)?;
        rep.push("SU(3) center pair eigenvalue bound < 2", 1, b.max_eigenvalue, 2.0 - 1e-9, true);
    }

    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let mut min_det = f64::INFINITY;
    let mut ident: f64 = 0.0;
    let homotopy_samples = size.phase_samples;
    for (gi, group) in [MatrixGroup::SU(2), MatrixGroup::SU(3), MatrixGroup::SO(5)].into_iter().enumerate() {
        for i in 0..homotopy_samples {
            let mut rng = sample_rng(seed.wrapping_add(20 + gi as u64), i as u64);
            let (a, b) = random_torus_pair(group, &mut rng);
            let h = homotopy_nondegeneracy(&a, &b, &grid)?;
            min_det = min_det.min(h.min_abs_det);
            ident = ident.max(h.identity_residual);
        }
    }
    let p = WeylPairModel::su_center(3, 1, 2);
    let h = homotopy_nondegeneracy(&p.n1, &p.n2, &grid)?;
    min_det = min_det.min(h.min_abs_det);
    ident = ident.max(h.identity_residual);
    rep.push("homotopy min |det| > 0", 3 * homotopy_samples + 1, min_det, 1e-9, false);
    rep.push("homotopy determinant identity", 3 * homotopy_samples + 1, ident, REL_TOL, true);

    for (gi, group) in [MatrixGroup::SU(2), MatrixGroup::SU(3), MatrixGroup::SO(5)].into_iter().enumerate() {
        let worst = phase_sweep(group, size.phase_samples, seed.wrapping_add(30 + gi as u64))?;
        rep.push(&format!("{} phase = (-1)^#R+", group.name()), size.phase_samples, worst, 1e-9, true);
    }

    for model in [
        WeylPairModel::identity(MatrixGroup::SU(2)),
        WeylPairModel::su_center(2, 1, 0),
        WeylPairModel::su_center(3, 1, 2),
        WeylPairModel::su_center(4, 1, 2),
        WeylPairModel::so_even_pair(4),
    ] {
        let f = fusion_volume_check(&model, size.fusion_samples, seed.wrapping_add(40))?;
        rep.push(&format!("{} |Pf| = 1", f.model), f.samples, f.max_error, REL_TOL, true);
        rep.push(&format!("{} det C^T = 1", f.model), f.samples, f.max_det_residual, ABS_TOL, true);
    }

    for n in [4, 6, 8] {
        let c = clifford_lifts(n)?;
        let worst = c.spin_commutators.iter().copied().fold(c.so_commutator.max(c.lift_residual), f64::max);
        rep.push(&format!("Spin({}) lifts commute", 2 * n), 4, if c.even { worst } else { f64::INFINITY }, ABS_TOL, true);
    }

    let probe = moment_map_probe(3, 2, size.probe_samples / 6, seed.wrapping_add(50));
    rep.push("distinct t_lambda are not conjugate", probe.pairs * probe.samples_per_pair, probe.min_distance, 1e-3, false);
    rep.push(
        "alcove meets each class once",
        200,
        (probe.alcove_mismatches + probe.alcove_collisions) as f64,
        0.0,
        true,
    );
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn adjoint_of_identity_and_su2_example() {
        let g = MatrixGroup::SU(2);
        let e = MatrixGroupElement::identity(g);
        assert!((adjoint_rep(&e) - RMat::identity(3, 3)).amax() < 1e-14);
        let t = MatrixGroupElement::torus(g, &[0.25]);
        let ad = adjoint_rep(&t);
        // rotation by pi on the root plane, +1 on the Cartan direction
        let expect = RMat::from_diagonal(&DVector::from_vec(vec![-1.0, -1.0, 1.0]));
        assert!((ad - expect).amax() < 1e-12);
    }

    #[test]
    fn adjoint_is_a_homomorphism() {
        let mut rng = sample_rng(7, 0);
        for group in [MatrixGroup::SU(3), MatrixGroup::SO(5)] {
            let a = MatrixGroupElement::random(group, &mut rng);
            let b = MatrixGroupElement::random(group, &mut rng);
            let lhs = adjoint_rep(&a.mul(&b));
            let rhs = adjoint_rep(&a) * adjoint_rep(&b);
            assert!((lhs - rhs).amax() < 1e-10);
            let ad = adjoint_rep(&a);
            assert!((ad.transpose() * &ad - RMat::identity(ad.nrows(), ad.nrows())).amax() < 1e-10);
        }
    }

    #[test]
    fn random_elements_are_in_the_group() {
        let mut rng = sample_rng(3, 1);
        for group in [MatrixGroup::SU(2), MatrixGroup::SU(4), MatrixGroup::SO(6)] {
            let a = MatrixGroupElement::random(group, &mut rng);
            assert!(MatrixGroupElement::new(group, a.matrix().clone()).is_ok());
        }
        assert!(MatrixGroupElement::new(MatrixGroup::SU(2), CMat::identity(2, 2) * Complex64::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn two_form_at_identity_is_standard() {
        let e = MatrixGroupElement::identity(MatrixGroup::SU(2));
        let c = two_form_at(&e, &e).unwrap();
        let id = RMat::identity(3, 3);
        assert!(c.c11.amax() < 1e-14 && c.c22.amax() < 1e-14);
        assert!((&c.c12 - &id).amax() < 1e-14);
        assert!((&c.c21 + &id).amax() < 1e-14);
    }

    #[test]
    fn two_form_is_antisymmetric_and_first_order_standard() {
        let mut rng = sample_rng(11, 0);
        let g = MatrixGroup::SU(3);
        let a = MatrixGroupElement::random(g, &mut rng);
        let b = MatrixGroupElement::random(g, &mut rng);
        assert!(two_form_at(&a, &b).unwrap().antisymmetry_residual() < 1e-10);
        // near the identity C differs from C0 by O(eps)
        let e = MatrixGroupElement::identity(g);
        let c0 = two_form_at(&e, &e).unwrap().full();
        for eps in [1e-3, 1e-4] {
            let near = |x: &MatrixGroupElement| {
                let log = (x.matrix() - CMat::identity(3, 3)) * Complex64::new(eps, 0.0) + CMat::identity(3, 3);
                let q = log.qr().q();
                let det = q.determinant();
                MatrixGroupElement::new(g, q * Complex64::from_polar(1.0, -det.arg() / 3.0)).unwrap()
            };
            let c = two_form_at(&near(&a), &near(&b)).unwrap().full();
            assert!((c - &c0).amax() < 20.0 * eps);
        }
    }

    #[test]
    fn torus_det_examples() {
        let id = RMat::identity(1, 1);
        assert_eq!(torus_det_check(&id, &id).unwrap(), 0.0);
        assert!(torus_det_check(&(-&id), &id).unwrap() < ABS_TOL);
        let (w1, w2) = dn_weyl_pair(4);
        assert!(torus_det_check(&w1, &w2).unwrap() < ABS_TOL);
        let a = RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let b = RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(torus_det_check(&a, &b), Err(FixedPointError::NonCommuting(_))));
    }

    #[test]
    fn dn_pair_matches_center_maps() {
        // the D_4 center Weyl images, as a set, include a commuting pair of
        // the same shape; all center pairs satisfy the determinant identity
        let d = RootDatum::new("D4".parse().unwrap());
        let ws = center_weyl_matrices(&d);
        assert_eq!(ws.len(), 4);
        for w1 in &ws {
            for w2 in &ws {
                assert!(torus_det_check(w1, w2).unwrap() < ABS_TOL);
            }
        }
    }

    #[test]
    fn eigenvalue_bound_examples() {
        let g = MatrixGroup::SU(2);
        let e = MatrixGroupElement::identity(g);
        let b = eigenvalue_bound_check(&e, &e).unwrap();
        assert!((b.max_eigenvalue + 2.0).abs() < 1e-12);
        assert_eq!(b.dim_k, 0);
        assert!(scalar_bound(PI / 2.0, PI / 2.0).abs() < 1e-15);
        // a = diag(i,-i): Ad_a = -1 on the root plane, so that plane is k
        let a = MatrixGroupElement::torus(g, &[0.25]);
        let b = eigenvalue_bound_check(&a, &e).unwrap();
        assert_eq!(b.dim_k, 2);
        assert!(b.k_block_residual < 1e-12);
        // psi_a = 2 pi/3, psi_b = -2 pi/3 gives 1 + 3/2 = 5/2
        let a = MatrixGroupElement::torus(g, &[1.0 / 6.0]);
        let b = MatrixGroupElement::torus(g, &[-1.0 / 6.0]);
        let r = eigenvalue_bound_check(&a, &b).unwrap();
        assert!((r.max_eigenvalue - 2.5).abs() < 1e-12);
        assert!((scalar_bound(2.0 * PI / 3.0, -2.0 * PI / 3.0) - 2.5).abs() < 1e-12);
        let h = homotopy_nondegeneracy(&a, &b, &[0.0, 0.5, 1.0]).unwrap();
        assert!(h.crosses_zero);
        let sweep = eigen_bound_sweep(MatrixGroup::SU(3), 200, 5).unwrap();
        assert!(sweep.violations > 0 && sweep.violations < 200);
    }

    #[test]
    fn homotopy_examples() {
        let g = MatrixGroup::SU(2);
        let e = MatrixGroupElement::identity(g);
        let h = homotopy_nondegeneracy(&e, &e, &[0.0, 1.0]).unwrap();
        assert!((h.min_abs_det - 1.0).abs() < 1e-12);
        let a = MatrixGroupElement::torus(g, &[0.1]);
        let b = MatrixGroupElement::torus(g, &[0.37]);
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let h = homotopy_nondegeneracy(&a, &b, &grid).unwrap();
        assert!(!h.crosses_zero);
        assert!(h.min_abs_det > 0.0);
        assert!(h.identity_residual < REL_TOL);
    }

    #[test]
    fn phase_examples() {
            let e2 = MatrixGroupElement::identity(MatrixGroup::SU(2));
        let c0 = two_form_at(&e2, &e2).unwrap().full();
        let j = compatible_complex_structure(&c0, &RMat::identity(6, 6)).unwrap();
        assert!((phase_factor(&RMat::identity(6, 6), &j).unwrap() - 1.0).norm() < 1e-12);
        let mut rng = sample_rng(1, 2);
        for group in [MatrixGroup::SU(2), MatrixGroup::SU(3)] {
            let t = random_regular_torus(group, &mut rng, 1e-3);
            let e = MatrixGroupElement::identity(group);
            for s in [ComplexStructure::Standard, ComplexStructure::Twisted] {
                let p = fixed_point_phase(&e, &e, &t, s).unwrap();
                assert!((p + 1.0).norm() < 1e-9, "{group:?} {p}");
            }
        }
    }

    #[test]
    fn phase_at_center_pair() {
        // (P, P) in SU(3) is fixed by t = diag(1, w, w^2) up to the center
        let p = WeylPairModel::su_center(3, 1, 1);
        let t = MatrixGroupElement::torus(MatrixGroup::SU(3), &[0.0, 1.0 / 3.0]);
        let phase = fixed_point_phase(&p.n1, &p.n2, &t, ComplexStructure::Standard).unwrap();
        assert!((phase + 1.0).norm() < 1e-9, "{phase}");
    }

    #[test]
    fn pfaffian_basics() {
        let m = RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert_eq!(pfaffian(&m), 1.0);
        let mut m4 = RMat::zeros(4, 4);
        let vals = [(0, 1, 2.0), (0, 2, 3.0), (0, 3, 5.0), (1, 2, 7.0), (1, 3, 11.0), (2, 3, 13.0)];
        for (i, j, v) in vals {
            m4[(i, j)] = v;
            m4[(j, i)] = -v;
        }
        let pf = pfaffian(&m4);
        assert!((pf - (2.0 * 13.0 - 3.0 * 11.0 + 5.0 * 7.0)).abs() < 1e-12);
        assert!((pf * pf - m4.determinant()).abs() < 1e-9);
    }

    #[test]
    fn fusion_volumes() {
        for model in [WeylPairModel::identity(MatrixGroup::SU(2)), WeylPairModel::su_center(2, 1, 0), WeylPairModel::so_even_pair(4)] {
            let r = fusion_volume_check(&model, 20, 9).unwrap();
            assert!(r.max_error < 1e-10, "{r:?}");
            assert!(r.max_det_residual < 1e-10, "{r:?}");
            assert!(r.sign.is_some());
        }
    }

    #[test]
    fn clifford_examples() {
        let a = CliffordBlade::new(&[1, 3]);
        let b = CliffordBlade::new(&[0, 2]);
        assert!(a.commutes_with(&b));
        assert!(!CliffordBlade::new(&[0, 1]).commutes_with(&CliffordBlade::new(&[1, 2])));
        for n in [4, 6, 8] {
            let r = clifford_lifts(n).unwrap();
            assert!(r.commute(), "{r:?}");
        }
        assert!(clifford_lift_commutes(2).unwrap());
        assert!(matches!(clifford_lifts(3), Err(FixedPointError::OddRank(3))));
        assert!(matches!(clifford_lifts(10), Err(FixedPointError::RankCap(10))));
    }

    #[test]
    fn probe_small() {
        let r = moment_map_probe(2, 3, 300, 4);
        assert!(r.min_distance > 1e-3);
        assert_eq!(r.alcove_mismatches, 0);
        assert_eq!(r.alcove_collisions, 0);
    }

    proptest! {
        #[test]
        fn blade_product_is_associative(a in 0u16..256, b in 0u16..256, c in 0u16..256) {
            let (x, y, z) = (CliffordBlade { mask: a, sign: 1 }, CliffordBlade { mask: b, sign: 1 }, CliffordBlade { mask: c, sign: 1 });
            prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        }

        #[test]
        fn vectors_square_to_norm(v in proptest::collection::vec(-3.0f64..3.0, 6)) {
            let m = Multivector::vector(&v);
            let sq = m.mul(&m);
            let norm: f64 = v.iter().map(|x| x * x).sum();
            prop_assert!(sq.sub(&Multivector::scalar(norm)).norm_max() < 1e-9);
        }
    }
}
