//! Static Lie-theoretic data for the simple types, normalised to the basic
//! inner product (long roots have squared length 2).
//!
//! Every type lives in its standard Euclidean model: `Q^n` with the inner
//! product `scale * (x . y)`. The scale is 1 except for `C_N` (1/2) and `G_2`
//! (1/3), which is what keeps every coordinate rational. Weights are stored in
//! the fundamental-weight basis; conversions to and from the ambient space go
//! through fixed rational matrices.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::RootDatumError;
use crate::linalg::{self, rat, ratio, Rational};

/// Default cap on `|W|` for explicit Weyl group enumeration (covers `E_7`).
pub const DEFAULT_WEYL_CAP: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Family {
    pub fn letter(self) -> char {
        match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
            Family::D => 'D',
            Family::E => 'E',
            Family::F => 'F',
            Family::G => 'G',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LieType {
    family: Family,
    rank: usize,
}

impl LieType {
    pub fn new(family: Family, rank: usize) -> Result<Self, RootDatumError> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::B | Family::C => rank >= 2,
            Family::D => rank >= 3,
            Family::E => (6..=8).contains(&rank),
            Family::F => rank == 4,
            Family::G => rank == 2,
        };
        if ok {
            Ok(LieType { family, rank })
        } else {
            Err(RootDatumError::InvalidType { family: family.letter(), rank })
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `|W|` from the classical formulas.
    pub fn weyl_order(&self) -> u128 {
        let n = self.rank as u128;
        let fact = |m: u128| (1..=m).product::<u128>();
        match (self.family, self.rank) {
            (Family::A, _) => fact(n + 1),
            (Family::B, _) | (Family::C, _) => (1u128 << n) * fact(n),
            (Family::D, _) => (1u128 << (n - 1)) * fact(n),
            (Family::E, 6) => 51_840,
            (Family::E, 7) => 2_903_040,
            (Family::E, _) => 696_729_600,
            (Family::F, _) => 1152,
            (Family::G, _) => 12,
        }
    }

    pub fn is_simply_laced(&self) -> bool {
        matches!(self.family, Family::A | Family::D | Family::E)
    }
}

impl fmt::Display for LieType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.letter(), self.rank)
    }
}

impl FromStr for LieType {
    type Err = RootDatumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let mut chars = s.chars();
        let letter = chars.next().ok_or_else(|| RootDatumError::Parse(s.to_string()))?;
        let family = match letter.to_ascii_uppercase() {
            'A' => Family::A,
            'B' => Family::B,
            'C' => Family::C,
            'D' => Family::D,
            'E' => Family::E,
            'F' => Family::F,
            'G' => Family::G,
            _ => return Err(RootDatumError::Parse(s.to_string())),
        };
        let rest = chars.as_str().trim_start_matches('_');
        let rank = rest.parse::<usize>().map_err(|_| RootDatumError::Parse(s.to_string()))?;
        LieType::new(family, rank)
    }
}

/// Integer vector in the fundamental-weight basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(pub Vec<i64>);

impl WeightVector {
    pub fn zero(rank: usize) -> Self {
        WeightVector(vec![0; rank])
    }

    pub fn fundamental(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        WeightVector(v)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_dominant(&self) -> bool {
        self.0.iter().all(|&x| x >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn add(&self, other: &WeightVector) -> WeightVector {
        WeightVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> WeightVector {
        WeightVector(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

impl From<Vec<i64>> for WeightVector {
    fn from(v: Vec<i64>) -> Self {
        WeightVector(v)
    }
}

/// A Weyl group element as a word in simple reflections together with its
/// matrix on the ambient space.
#[derive(Clone, Debug)]
pub struct WeylElement {
    word: Vec<usize>,
    matrix: Vec<Vec<Rational>>,
}

impl PartialEq for WeylElement {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl Eq for WeylElement {}

impl WeylElement {
    pub fn identity(d: &RootDatum) -> Self {
        WeylElement { word: Vec::new(), matrix: linalg::identity(d.ambient_dim) }
    }

    pub fn from_word(d: &RootDatum, word: &[usize]) -> Self {
        let mut m = linalg::identity(d.ambient_dim);
        for &i in word {
            m = linalg::mat_mul(&m, &d.reflection_matrix(i));
        }
        WeylElement { word: word.to_vec(), matrix: m }
    }

    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    /// `det(w) = (-1)^{len(word)}`.
    pub fn sign(&self) -> i8 {
        if self.word.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == linalg::identity(self.matrix.len())
    }

    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        linalg::mat_vec(&self.matrix, x)
    }

    /// Action on fundamental-weight coordinates.
    pub fn apply_weight(&self, d: &RootDatum, w: &WeightVector) -> WeightVector {
        let mut v = w.0.clone();
        for &i in self.word.iter().rev() {
            d.reflect_weight_in_place(i, &mut v);
        }
        WeightVector(v)
    }

    pub fn compose(&self, other: &WeylElement) -> WeylElement {
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        WeylElement { word, matrix: linalg::mat_mul(&self.matrix, &other.matrix) }
    }

    pub fn inverse(&self) -> WeylElement {
        WeylElement {
            word: self.word.iter().rev().copied().collect(),
            matrix: linalg::transpose(&self.matrix),
        }
    }

    /// Matrix on fundamental-weight coordinates: column `j` is `w(omega_j)`.
    pub fn weight_matrix(&self, d: &RootDatum) -> Vec<Vec<i64>> {
        let r = d.rank();
        let cols: Vec<WeightVector> =
            (0..r).map(|j| self.apply_weight(d, &WeightVector::fundamental(r, j))).collect();
        (0..r).map(|i| (0..r).map(|j| cols[j].0[i]).collect()).collect()
    }
}

/// Result of reducing a point of `t` into the closed fundamental alcove:
/// `xi = w(reduced) + translation` with `translation` in the coroot lattice.
#[derive(Clone, Debug)]
pub struct AffineReduction {
    pub reduced: Vec<Rational>,
    pub weyl: WeylElement,
    pub translation: Vec<Rational>,
}

#[derive(Clone, Debug)]
pub struct RootDatum {
    lie_type: LieType,
    ambient_dim: usize,
    metric_scale: Rational,
    cartan: Vec<Vec<i64>>,
    simple_roots: Vec<Vec<Rational>>,
    simple_coroots: Vec<Vec<Rational>>,
    fundamental_weights: Vec<Vec<Rational>>,
    positive_roots: Vec<Vec<Rational>>,
    positive_roots_weight: Vec<Vec<i64>>,
    highest_root: Vec<Rational>,
    marks: Vec<i64>,
    comarks: Vec<i64>,
    dual_coxeter: u32,
    gram_weights: Vec<Vec<Rational>>,
    gram_denominator: i64,
    gram_scaled: Vec<Vec<i64>>,
    half_root_norms: Vec<Rational>,
    center_order: usize,
    long_index: u64,
    center_nodes: Vec<Option<usize>>,
    center_coweight_reps: Vec<Vec<Rational>>,
    center_table: Vec<Vec<usize>>,
}

fn unit(n: usize, i: usize) -> Vec<Rational> {
    (0..n).map(|j| if i == j { rat(1) } else { rat(0) }).collect()
}

fn vec_of(xs: &[i64]) -> Vec<Rational> {
    xs.iter().map(|&x| rat(x)).collect()
}

fn halves(xs: &[i64]) -> Vec<Rational> {
    xs.iter().map(|&x| ratio(x, 2)).collect()
}

fn e_minus_e(n: usize, i: usize, j: usize) -> Vec<Rational> {
    linalg::sub(&unit(n, i), &unit(n, j))
}

/// Bourbaki simple roots in the standard model, plus the metric scale.
fn bourbaki_model(t: LieType) -> (usize, Rational, Vec<Vec<Rational>>) {
    let n = t.rank;
    match t.family {
        Family::A => {
            let roots = (0..n).map(|i| e_minus_e(n + 1, i, i + 1)).collect();
            (n + 1, rat(1), roots)
        }
        Family::B => {
            let mut roots: Vec<_> = (0..n - 1).map(|i| e_minus_e(n, i, i + 1)).collect();
            roots.push(unit(n, n - 1));
            (n, rat(1), roots)
        }
        Family::C => {
            let mut roots: Vec<_> = (0..n - 1).map(|i| e_minus_e(n, i, i + 1)).collect();
            roots.push(linalg::scale(&rat(2), &unit(n, n - 1)));
            (n, ratio(1, 2), roots)
        }
        Family::D => {
            let mut roots: Vec<_> = (0..n - 1).map(|i| e_minus_e(n, i, i + 1)).collect();
            roots.push(linalg::add(&unit(n, n - 2), &unit(n, n - 1)));
            (n, rat(1), roots)
        }
        Family::E => {
            let mut all = vec![halves(&[1, -1, -1, -1, -1, -1, -1, 1]), vec_of(&[1, 1, 0, 0, 0, 0, 0, 0])];
            for i in 0..6 {
                all.push(e_minus_e(8, i + 1, i));
            }
            all.truncate(n);
            (8, rat(1), all)
        }
        Family::F => (
            4,
            rat(1),
            vec![
                vec_of(&[0, 1, -1, 0]),
                vec_of(&[0, 0, 1, -1]),
                vec_of(&[0, 0, 0, 1]),
                halves(&[1, -1, -1, -1]),
            ],
        ),
        Family::G => (3, ratio(1, 3), vec![vec_of(&[1, -1, 0]), vec_of(&[-2, 1, 1])]),
    }
}

impl RootDatum {
    /// Process-wide shared datum for `t`; construction happens once per type.
    pub fn shared(t: LieType) -> Arc<RootDatum> {
        static CACHE: OnceLock<Mutex<HashMap<LieType, Arc<RootDatum>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(d) = cache.lock().expect("root datum cache poisoned").get(&t) {
            return d.clone();
        }
        let d = Arc::new(RootDatum::new(t));
        cache.lock().expect("root datum cache poisoned").entry(t).or_insert(d).clone()
    }

    pub fn new(t: LieType) -> Self {
        let (ambient_dim, metric_scale, simple_roots) = bourbaki_model(t);
        let r = t.rank;
        let ip = |x: &[Rational], y: &[Rational]| &metric_scale * linalg::dot(x, y);

        let half_root_norms: Vec<Rational> =
            simple_roots.iter().map(|a| ip(a, a) / rat(2)).collect();
        let simple_coroots: Vec<Vec<Rational>> = simple_roots
            .iter()
            .zip(&half_root_norms)
            .map(|(a, h)| linalg::scale(&(rat(1) / h), a))
            .collect();
        let cartan: Vec<Vec<i64>> = (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| {
                        linalg::to_i64(&ip(&simple_roots[j], &simple_coroots[i]))
                            .expect("integral Cartan entry")
                    })
                    .collect()
            })
            .collect();

        // omega_i = sum_j M_ij alpha_j with M = (A^T)^{-1}
        let a_t: Vec<Vec<Rational>> =
            (0..r).map(|i| (0..r).map(|j| rat(cartan[j][i])).collect()).collect();
        let m = linalg::invert(&a_t).expect("Cartan matrix is invertible");
        let fundamental_weights: Vec<Vec<Rational>> = (0..r)
            .map(|i| {
                (0..r).fold(vec![rat(0); ambient_dim], |acc, j| {
                    linalg::add(&acc, &linalg::scale(&m[i][j], &simple_roots[j]))
                })
            })
            .collect();

        let gram_weights: Vec<Vec<Rational>> = (0..r)
            .map(|i| (0..r).map(|j| ip(&fundamental_weights[i], &fundamental_weights[j])).collect())
            .collect();
        let gram_den = linalg::lcm_of_denominators(gram_weights.iter().flatten());
        let gram_denominator = gram_den.to_i64().expect("small gram denominator");
        let gram_scaled = gram_weights
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| linalg::to_i64(&(x * rat(gram_denominator))).expect("integral"))
                    .collect()
            })
            .collect();

        let mut datum = RootDatum {
            lie_type: t,
            ambient_dim,
            metric_scale,
            cartan,
            simple_roots,
            simple_coroots,
            fundamental_weights,
            positive_roots: Vec::new(),
            positive_roots_weight: Vec::new(),
            highest_root: Vec::new(),
            marks: Vec::new(),
            comarks: Vec::new(),
            dual_coxeter: 0,
            gram_weights,
            gram_denominator,
            gram_scaled,
            half_root_norms,
            center_order: 0,
            long_index: 0,
            center_nodes: Vec::new(),
            center_coweight_reps: Vec::new(),
            center_table: Vec::new(),
        };
        datum.build_roots();
        datum.build_center();
        datum
    }

    fn build_roots(&mut self) {
        let r = self.rank();
        // W-orbit closure of the simple roots, in weight coordinates.
        let mut all: HashSet<Vec<i64>> = HashSet::new();
        let mut frontier: Vec<Vec<i64>> =
            (0..r).map(|j| (0..r).map(|i| self.cartan[i][j]).collect()).collect();
        all.extend(frontier.iter().cloned());
        while let Some(v) = frontier.pop() {
            for i in 0..r {
                let mut w = v.clone();
                self.reflect_weight_in_place(i, &mut w);
                if all.insert(w.clone()) {
                    frontier.push(w);
                }
            }
        }
        let mut positive: Vec<(Vec<i64>, Vec<i64>)> = all
            .into_iter()
            .map(|w| {
                let amb = self.weight_to_ambient_int(&w);
                let coeffs: Vec<i64> = (0..r)
                    .map(|j| {
                        let c = self.inner(&amb, &self.fundamental_weights[j]) / &self.half_root_norms[j];
                        linalg::to_i64(&c).expect("integral root coordinate")
                    })
                    .collect();
                (w, coeffs)
            })
            .filter(|(_, c)| c.iter().all(|&x| x >= 0))
            .collect();
        // height, then coordinates: deterministic order
        positive.sort_by(|a, b| {
            let ha: i64 = a.1.iter().sum();
            let hb: i64 = b.1.iter().sum();
            ha.cmp(&hb).then_with(|| a.1.cmp(&b.1))
        });
        let (theta_w, theta_c) = positive.last().cloned().expect("nonempty root system");
        self.marks = theta_c;
        self.highest_root = self.weight_to_ambient_int(&theta_w);
        self.comarks = (0..r)
            .map(|i| {
                linalg::to_i64(&self.inner(&self.fundamental_weights[i], &self.highest_root))
                    .expect("integral comark")
            })
            .collect();
        self.dual_coxeter = 1 + self.comarks.iter().sum::<i64>() as u32;
        self.positive_roots = positive.iter().map(|(w, _)| self.weight_to_ambient_int(w)).collect();
        self.positive_roots_weight = positive.into_iter().map(|(w, _)| w).collect();
    }

    fn build_center(&mut self) {
        let r = self.rank();
        let mut nodes = vec![None];
        let mut reps = vec![vec![rat(0); self.ambient_dim]];
        for j in 0..r {
            if self.marks[j] == 1 {
                nodes.push(Some(j));
                reps.push(self.fundamental_coweight(j));
            }
        }
        self.center_order = reps.len();
        self.center_nodes = nodes;
        self.center_coweight_reps = reps;
        let n = self.center_order;
        self.center_table = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let s = linalg::add(&self.center_coweight_reps[a], &self.center_coweight_reps[b]);
                        (0..n)
                            .find(|&c| self.in_coroot_lattice(&linalg::sub(&s, &self.center_coweight_reps[c])))
                            .expect("closed group law")
                    })
                    .collect()
            })
            .collect();

        let long: Vec<Vec<i64>> = self
            .positive_roots
            .iter()
            .filter(|a| self.inner(a, a) == rat(2))
            .map(|a| {
                (0..r)
                    .map(|j| {
                        linalg::to_i64(&(self.inner(a, &self.fundamental_weights[j]) / &self.half_root_norms[j]))
                            .expect("integral")
                    })
                    .collect()
            })
            .collect();
        self.long_index = linalg::lattice_index(&long, r).expect("long roots span a full-rank lattice");
    }

    pub fn lie_type(&self) -> LieType {
        self.lie_type
    }

    pub fn rank(&self) -> usize {
        self.lie_type.rank
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn metric_scale(&self) -> &Rational {
        &self.metric_scale
    }

    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    pub fn simple_roots(&self) -> &[Vec<Rational>] {
        &self.simple_roots
    }

    pub fn simple_coroots(&self) -> &[Vec<Rational>] {
        &self.simple_coroots
    }

    pub fn fundamental_weights(&self) -> &[Vec<Rational>] {
        &self.fundamental_weights
    }

    pub fn positive_roots(&self) -> &[Vec<Rational>] {
        &self.positive_roots
    }

    /// Positive roots in fundamental-weight coordinates, ordered by height.
    pub fn positive_roots_weight(&self) -> &[Vec<i64>] {
        &self.positive_roots_weight
    }

    pub fn highest_root(&self) -> &[Rational] {
        &self.highest_root
    }

    /// Coefficients of the highest root in the simple roots.
    pub fn marks(&self) -> &[i64] {
        &self.marks
    }

    /// `<omega_i, theta>`, i.e. the level contributed by `omega_i`.
    pub fn comarks(&self) -> &[i64] {
        &self.comarks
    }

    pub fn dual_coxeter(&self) -> u32 {
        self.dual_coxeter
    }

    pub fn gram_weights(&self) -> &[Vec<Rational>] {
        &self.gram_weights
    }

    /// Least common denominator `D` of the weight Gram matrix.
    pub fn gram_denominator(&self) -> i64 {
        self.gram_denominator
    }

    /// `D * <omega_i, omega_j>` as integers.
    pub fn gram_scaled(&self) -> &[Vec<i64>] {
        &self.gram_scaled
    }

    pub fn center_order(&self) -> usize {
        self.center_order
    }

    pub fn long_index(&self) -> u64 {
        self.long_index
    }

    pub fn center_coweight_reps(&self) -> &[Vec<Rational>] {
        &self.center_coweight_reps
    }

    /// Dynkin node carrying each center representative (`None` for the identity).
    pub fn center_nodes(&self) -> &[Option<usize>] {
        &self.center_nodes
    }

    pub fn center_mul(&self, a: usize, b: usize) -> usize {
        self.center_table[a][b]
    }

    pub fn center_inverse(&self, a: usize) -> usize {
        (0..self.center_order).find(|&b| self.center_table[a][b] == 0).expect("group inverse")
    }

    pub fn weyl_order(&self) -> u128 {
        self.lie_type.weyl_order()
    }

    pub fn num_positive_roots(&self) -> usize {
        self.positive_roots.len()
    }

    /// Basic inner product on the ambient space.
    pub fn inner(&self, x: &[Rational], y: &[Rational]) -> Rational {
        &self.metric_scale * linalg::dot(x, y)
    }

    pub fn try_inner(&self, x: &[Rational], y: &[Rational]) -> Result<Rational, RootDatumError> {
        for v in [x, y] {
            if v.len() != self.ambient_dim {
                return Err(RootDatumError::DimensionMismatch { expected: self.ambient_dim, got: v.len() });
            }
        }
        Ok(self.inner(x, y))
    }

    /// `omega_j^vee = omega_j / (|alpha_j|^2 / 2)` under the basic identification.
    pub fn fundamental_coweight(&self, j: usize) -> Vec<Rational> {
        linalg::scale(&(rat(1) / &self.half_root_norms[j]), &self.fundamental_weights[j])
    }

    pub fn rho(&self) -> WeightVector {
        WeightVector(vec![1; self.rank()])
    }

    pub fn rho_ambient(&self) -> Vec<Rational> {
        self.weight_to_ambient(&self.rho())
    }

    fn weight_to_ambient_int(&self, w: &[i64]) -> Vec<Rational> {
        w.iter().zip(&self.fundamental_weights).fold(vec![rat(0); self.ambient_dim], |acc, (&c, om)| {
            if c == 0 {
                acc
            } else {
                linalg::add(&acc, &linalg::scale(&rat(c), om))
            }
        })
    }

    pub fn weight_to_ambient(&self, w: &WeightVector) -> Vec<Rational> {
        self.weight_to_ambient_int(&w.0)
    }

    pub fn rational_weight_to_ambient(&self, w: &[Rational]) -> Vec<Rational> {
        w.iter().zip(&self.fundamental_weights).fold(vec![rat(0); self.ambient_dim], |acc, (c, om)| {
            linalg::add(&acc, &linalg::scale(c, om))
        })
    }

    /// Coordinates `<x, alpha_i^vee>`; integral exactly on the weight lattice.
    pub fn ambient_to_weight_coords(&self, x: &[Rational]) -> Vec<Rational> {
        self.simple_coroots.iter().map(|c| self.inner(x, c)).collect()
    }

    pub fn ambient_to_weight(&self, x: &[Rational]) -> Option<WeightVector> {
        self.ambient_to_weight_coords(x).iter().map(linalg::to_i64).collect::<Option<Vec<_>>>().map(WeightVector)
    }

    /// Coroot-lattice membership: `<omega_i, x>` integral for all `i`, and no
    /// component outside the span of the roots.
    pub fn in_coroot_lattice(&self, x: &[Rational]) -> bool {
        let coords: Vec<Rational> = self.fundamental_weights.iter().map(|om| self.inner(om, x)).collect();
        if !coords.iter().all(linalg::is_integral) {
            return false;
        }
        let rebuilt = coords.iter().zip(&self.simple_coroots).fold(vec![rat(0); self.ambient_dim], |acc, (c, a)| {
            linalg::add(&acc, &linalg::scale(c, a))
        });
        rebuilt == x
    }

    /// `<lambda, theta>`.
    pub fn level(&self, w: &WeightVector) -> i64 {
        w.0.iter().zip(&self.comarks).map(|(a, b)| a * b).sum()
    }

    /// `<x, y>` for weight-coordinate vectors, as a rational.
    pub fn weight_inner(&self, x: &WeightVector, y: &WeightVector) -> Rational {
        Rational::new(BigInt::from(self.weight_inner_scaled(&x.0, &y.0)), BigInt::from(self.gram_denominator))
    }

    /// `D <x, y>` as an integer.
    pub fn weight_inner_scaled(&self, x: &[i64], y: &[i64]) -> i64 {
        let mut s = 0i64;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            let row = &self.gram_scaled[i];
            s += xi * y.iter().zip(row).map(|(a, b)| a * b).sum::<i64>();
        }
        s
    }

    pub fn reflection_matrix(&self, i: usize) -> Vec<Vec<Rational>> {
        let n = self.ambient_dim;
        let a = &self.simple_roots[i];
        let c = &self.simple_coroots[i];
        (0..n)
            .map(|row| {
                (0..n)
                    .map(|col| {
                        let delta = if row == col { rat(1) } else { rat(0) };
                        // s(x) = x - <x, c> a, <x, c> = scale * x . c
                        delta - &a[row] * &c[col] * &self.metric_scale
                    })
                    .collect()
            })
            .collect()
    }

    pub fn reflect_ambient(&self, i: usize, x: &[Rational]) -> Vec<Rational> {
        let p = self.inner(x, &self.simple_coroots[i]);
        linalg::sub(x, &linalg::scale(&p, &self.simple_roots[i]))
    }

    pub(crate) fn reflect_weight_in_place(&self, i: usize, v: &mut [i64]) {
        let c = v[i];
        if c != 0 {
            for (row, x) in v.iter_mut().enumerate() {
                *x -= c * self.cartan[row][i];
            }
        }
    }

    pub fn reflect_weight(&self, i: usize, w: &WeightVector) -> WeightVector {
        let mut v = w.0.clone();
        self.reflect_weight_in_place(i, &mut v);
        WeightVector(v)
    }

    /// Dominant representative of the Weyl orbit of `w`, and a word `u` with
    /// `w = u(dominant)`.
    pub fn to_dominant(&self, w: &WeightVector) -> (WeightVector, Vec<usize>) {
        let mut v = w.0.clone();
        let mut word = Vec::new();
        while let Some(i) = v.iter().position(|&x| x < 0) {
            self.reflect_weight_in_place(i, &mut v);
            word.push(i);
        }
        (WeightVector(v), word)
    }

    /// The dual weight `*mu = -w_0(mu)`.
    pub fn dual_weight(&self, w: &WeightVector) -> WeightVector {
        self.to_dominant(&w.neg()).0
    }

    /// All dominant weights of level at most `k`, lexicographically ordered.
    pub fn level_weights(&self, k: u32) -> Vec<WeightVector> {
        let r = self.rank();
        let mut out = Vec::new();
        let mut cur = vec![0i64; r];
        fn rec(comarks: &[i64], i: usize, budget: i64, cur: &mut Vec<i64>, out: &mut Vec<WeightVector>) {
            if i == comarks.len() {
                out.push(WeightVector(cur.clone()));
                return;
            }
            let mut x = 0;
            while x * comarks[i] <= budget {
                cur[i] = x;
                rec(comarks, i + 1, budget - x * comarks[i], cur, out);
                x += 1;
            }
            cur[i] = 0;
        }
        rec(&self.comarks, 0, k as i64, &mut cur, &mut out);
        out
    }

    pub fn is_level_weight(&self, w: &WeightVector, k: u32) -> bool {
        w.rank() == self.rank() && w.is_dominant() && self.level(w) <= k as i64
    }

    /// Reduce `xi` to the closed fundamental alcove by reflecting in violated
    /// walls. Only strictly violated walls are used, so points already on a
    /// wall are never moved.
    pub fn affine_reduce(&self, xi: &[Rational]) -> AffineReduction {
        let r = self.rank();
        let mut cur = xi.to_vec();
        let mut word: Vec<usize> = Vec::new();
        let mut translation = vec![rat(0); self.ambient_dim];
        let one = rat(1);
        let theta = self.highest_root.clone();
        let theta_word = self.reflection_word_of_root(&theta);
        // the current Weyl element is tracked as a matrix alongside the word
        let mut w = linalg::identity(self.ambient_dim);
        loop {
            if let Some(i) = (0..r).find(|&i| self.inner(&self.simple_roots[i], &cur).is_negative()) {
                cur = self.reflect_ambient(i, &cur);
                w = linalg::mat_mul(&w, &self.reflection_matrix(i));
                word.push(i);
                continue;
            }
            let level = self.inner(&theta, &cur);
            if level > one {
                // affine reflection in {theta = 1}: cur -> s_theta(cur) + theta^vee
                let theta_vee = &theta; // long root: theta^vee = theta
                let reflected = linalg::sub(&cur, &linalg::scale(&level, theta_vee));
                cur = linalg::add(&reflected, theta_vee);
                translation = linalg::add(&translation, &linalg::mat_vec(&w, theta_vee));
                for &i in &theta_word {
                    w = linalg::mat_mul(&w, &self.reflection_matrix(i));
                }
                word.extend_from_slice(&theta_word);
                continue;
            }
            break;
        }
        AffineReduction { reduced: cur, weyl: WeylElement { word, matrix: w }, translation }
    }

    /// A word in simple reflections equal to the reflection `s_beta` for a
    /// root `beta`: conjugate a simple reflection by the path from `beta`
    /// down to a simple root.
    fn reflection_word_of_root(&self, beta: &[Rational]) -> Vec<usize> {
        let r = self.rank();
        let mut path = Vec::new();
        let mut cur = beta.to_vec();
        loop {
            if let Some(j) = (0..r).find(|&j| cur == self.simple_roots[j]) {
                let mut word = path.clone();
                word.push(j);
                word.extend(path.iter().rev());
                return word;
            }
            let i = (0..r)
                .find(|&i| self.inner(&cur, &self.simple_coroots[i]).is_positive() && {
                    let next = self.reflect_ambient(i, &cur);
                    // stay positive: only step down if the result is still a positive root
                    self.positive_roots.contains(&next)
                })
                .expect("positive root that is not simple descends");
            cur = self.reflect_ambient(i, &cur);
            path.push(i);
        }
    }

    /// Enumerate `W`, capped at `cap` elements.
    pub fn weyl_group_elements(&self, cap: u128) -> Result<WeylIter<'_>, RootDatumError> {
        let order = self.weyl_order();
        if order > cap {
            return Err(RootDatumError::GroupTooLarge { order, cap });
        }
        let words = self.weyl_words();
        Ok(WeylIter { datum: self, words: words.into_iter() })
    }

    /// Reduced words for all of `W`, indexed by the orbit of `rho`.
    fn weyl_words(&self) -> Vec<Vec<usize>> {
        let r = self.rank();
        let mut out = vec![Vec::new()];
        let mut layer: Vec<(Vec<i64>, Vec<usize>)> = vec![(vec![1; r], Vec::new())];
        while !layer.is_empty() {
            let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
            let mut next = Vec::new();
            for (v, word) in &layer {
                for i in 0..r {
                    if v[i] > 0 {
                        let mut u = v.clone();
                        self.reflect_weight_in_place(i, &mut u);
                        if seen.insert(u.clone()) {
                            let mut w = vec![i];
                            w.extend_from_slice(word);
                            next.push((u, w));
                        }
                    }
                }
            }
            out.extend(next.iter().map(|(_, w)| w.clone()));
            layer = next;
        }
        out
    }

    /// Orbit `W v` of a strictly dominant integral weight with `det(w)` signs,
    /// generated layer by layer in Bruhat length.
    pub fn signed_orbit(&self, v: &[i64]) -> Vec<(Vec<i64>, i8)> {
        debug_assert!(v.iter().all(|&x| x > 0), "signed orbit needs a regular dominant weight");
        let r = self.rank();
        let mut out = vec![(v.to_vec(), 1i8)];
        let mut layer = vec![v.to_vec()];
        let mut sign = 1i8;
        while !layer.is_empty() {
            sign = -sign;
            let mut seen: HashSet<Vec<i64>> = HashSet::new();
            let mut next = Vec::new();
            for u in &layer {
                for i in 0..r {
                    if u[i] > 0 {
                        let mut x = u.clone();
                        self.reflect_weight_in_place(i, &mut x);
                        if seen.insert(x.clone()) {
                            next.push(x);
                        }
                    }
                }
            }
            out.extend(next.iter().map(|x| (x.clone(), sign)));
            layer = next;
        }
        out
    }

    /// Orbit of an arbitrary dominant integral weight (no signs).
    pub fn orbit(&self, v: &[i64]) -> Vec<Vec<i64>> {
        let r = self.rank();
        let mut out = vec![v.to_vec()];
        let mut layer = vec![v.to_vec()];
        while !layer.is_empty() {
            let mut seen: HashSet<Vec<i64>> = HashSet::new();
            let mut next = Vec::new();
            for u in &layer {
                for i in 0..r {
                    if u[i] > 0 {
                        let mut x = u.clone();
                        self.reflect_weight_in_place(i, &mut x);
                        if seen.insert(x.clone()) {
                            next.push(x);
                        }
                    }
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    /// `w_gamma` with `gamma exp(A) = w_gamma(exp(A))`, read off from the
    /// reduction of `rho/c + xi_gamma` (the alcove barycentre `rho/c` is an
    /// interior point fixed by the center action).
    pub fn center_to_weyl(&self, gamma: usize) -> WeylElement {
        let p = self.exceptional_point();
        let red = self.affine_reduce(&linalg::add(&p, &self.center_coweight_reps[gamma]));
        debug_assert_eq!(red.reduced, p, "rho/c is fixed by the center");
        red.weyl
    }

    /// `rho / c` in ambient coordinates.
    pub fn exceptional_point(&self) -> Vec<Rational> {
        linalg::scale(&ratio(1, self.dual_coxeter as i64), &self.rho_ambient())
    }

    /// Affine map `x -> w^{-1}(x + xi_gamma - tau)` realising the center action
    /// on the alcove; returned as (matrix on weight coordinates, offset in
    /// weight coordinates per unit level).
    pub fn center_alcove_map(&self, gamma: usize) -> (Vec<Vec<i64>>, Vec<Rational>) {
        let p = self.exceptional_point();
        let red = self.affine_reduce(&linalg::add(&p, &self.center_coweight_reps[gamma]));
        let winv = red.weyl.inverse();
        let offset_amb = winv.apply(&linalg::sub(&self.center_coweight_reps[gamma], &red.translation));
        (winv.weight_matrix(self), self.ambient_to_weight_coords(&offset_amb))
    }

    /// `|alpha_i|^2 / 2` for each simple root.
    pub fn half_root_norms(&self) -> &[Rational] {
        &self.half_root_norms
    }

    /// Weyl dimension formula.
    pub fn weyl_dimension(&self, mu: &WeightVector) -> BigInt {
        let mut num = Rational::one();
        let shifted: Vec<i64> = mu.0.iter().map(|x| x + 1).collect();
        let rho = vec![1i64; self.rank()];
        for a in &self.positive_roots_weight {
            let top = self.weight_inner_scaled(&shifted, a);
            let bot = self.weight_inner_scaled(&rho, a);
            num *= Rational::new(BigInt::from(top), BigInt::from(bot));
        }
        debug_assert!(num.is_integer());
        num.to_integer()
    }
}

pub struct WeylIter<'a> {
    datum: &'a RootDatum,
    words: std::vec::IntoIter<Vec<usize>>,
}

impl Iterator for WeylIter<'_> {
    type Item = WeylElement;

    fn next(&mut self) -> Option<WeylElement> {
        self.words.next().map(|w| WeylElement::from_word(self.datum, &w))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.words.size_hint()
    }
}

/// Build the root datum of a validated simple type.
pub fn build_root_datum(t: LieType) -> RootDatum {
    RootDatum::new(t)
}

/// `<x,y>` with a dimension check.
pub fn inner(d: &RootDatum, x: &[Rational], y: &[Rational]) -> Result<Rational, RootDatumError> {
    d.try_inner(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> RootDatum {
        RootDatum::new(s.parse().unwrap())
    }

    #[test]
    fn invalid_types_rejected() {
        assert!(LieType::new(Family::E, 5).is_err());
        assert!(LieType::new(Family::D, 2).is_err());
        assert!(LieType::new(Family::B, 1).is_err());
        assert!(LieType::new(Family::G, 3).is_err());
        assert!(LieType::new(Family::A, 0).is_err());
        assert!("X3".parse::<LieType>().is_err());
    }

    #[test]
    fn a1_table_values() {
        let a1 = d("A1");
        assert_eq!(a1.dual_coxeter(), 2);
        assert_eq!(a1.center_order(), 2);
        assert_eq!(a1.long_index(), 1);
        assert_eq!(a1.num_positive_roots(), 1);
    }

    #[test]
    fn e8_and_g2_table_values() {
        let e8 = d("E8");
        assert_eq!((e8.dual_coxeter(), e8.center_order(), e8.long_index()), (30, 1, 1));
        assert_eq!(e8.num_positive_roots(), 120);
        let g2 = d("G2");
        assert_eq!((g2.dual_coxeter(), g2.center_order(), g2.long_index()), (4, 1, 3));
    }

    #[test]
    fn inner_products_of_fundamental_weights() {
        let a1 = d("A1");
        let w = &a1.fundamental_weights()[0];
        assert_eq!(a1.inner(w, w), ratio(1, 2));
        let a2 = d("A2");
        let fw = a2.fundamental_weights();
        assert_eq!(a2.inner(&fw[0], &fw[1]), ratio(1, 3));
        let zero = vec![rat(0); a2.ambient_dim()];
        assert_eq!(a2.inner(&zero, &fw[0]), rat(0));
        assert!(inner(&a2, &[rat(1)], &fw[0]).is_err());
    }

    #[test]
    fn long_roots_have_norm_two() {
        for t in ["A3", "B3", "C3", "D4", "E6", "F4", "G2"] {
            let dd = d(t);
            let th = dd.highest_root().to_vec();
            assert_eq!(dd.inner(&th, &th), rat(2), "{t}");
        }
    }

    #[test]
    fn level_weight_examples() {
        let a1 = d("A1");
        let w: Vec<_> = a1.level_weights(2).into_iter().map(|w| w.0).collect();
        assert_eq!(w, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(d("E6").level_weights(0), vec![WeightVector::zero(6)]);
        let a2: Vec<_> = d("A2").level_weights(1).into_iter().map(|w| w.0).collect();
        assert_eq!(a2, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn affine_reduce_a1_examples() {
        let a1 = d("A1");
        // xi with <alpha, xi> = s is s * omega^vee ... alpha = e1 - e2, <alpha, xi> = xi1 - xi2
        let at = |s: Rational| vec![s.clone() / rat(2), -s / rat(2)];
        let alpha = a1.simple_roots()[0].clone();

        let r = a1.affine_reduce(&at(ratio(1, 3)));
        assert_eq!(a1.inner(&alpha, &r.reduced), ratio(1, 3));
        assert!(r.weyl.is_identity());
        assert!(r.translation.iter().all(num_traits::Zero::is_zero));

        let r = a1.affine_reduce(&at(ratio(-1, 3)));
        assert_eq!(a1.inner(&alpha, &r.reduced), ratio(1, 3));
        assert_eq!(r.weyl.sign(), -1);
        assert!(r.translation.iter().all(num_traits::Zero::is_zero));

        let r = a1.affine_reduce(&at(ratio(5, 3)));
        assert_eq!(a1.inner(&alpha, &r.reduced), ratio(1, 3));
        assert_eq!(r.weyl.sign(), -1);
        assert_eq!(r.translation, a1.simple_coroots()[0]);
    }

    #[test]
    fn weyl_group_orders() {
        assert_eq!(d("A1").weyl_group_elements(DEFAULT_WEYL_CAP).unwrap().count(), 2);
        let signs: Vec<i8> = d("A1").weyl_group_elements(DEFAULT_WEYL_CAP).unwrap().map(|w| w.sign()).collect();
        assert_eq!(signs, vec![1, -1]);
        assert_eq!(d("A2").weyl_group_elements(DEFAULT_WEYL_CAP).unwrap().count(), 6);
        assert_eq!(d("F4").weyl_group_elements(DEFAULT_WEYL_CAP).unwrap().count(), 1152);
        assert!(matches!(
            d("E8").weyl_group_elements(DEFAULT_WEYL_CAP),
            Err(RootDatumError::GroupTooLarge { .. })
        ));
    }

    #[test]
    fn d_n_center_reps_are_the_alcove_vertices() {
        let d4 = d("D4");
        let reps = d4.center_coweight_reps();
        assert_eq!(reps.len(), 4);
        assert_eq!(reps[1], vec_of(&[1, 0, 0, 0]));
        assert_eq!(reps[2], halves(&[1, 1, 1, -1]));
        assert_eq!(reps[3], halves(&[1, 1, 1, 1]));
        // Z2 x Z2: every element squares to the identity
        for a in 0..4 {
            assert_eq!(d4.center_mul(a, a), 0);
        }
        let d5 = d("D5");
        // Z4: the spin vertex has order 4
        assert_ne!(d5.center_mul(2, 2), 0);
    }

    #[test]
    fn d_n_center_weyl_elements_match_closed_forms() {
        for n in [4usize, 6] {
            let dn = d(&format!("D{n}"));
            let w1 = dn.center_to_weyl(1);
            let x: Vec<Rational> = (1..=n as i64).map(|i| ratio(i, 7)).collect();
            let mut expect1 = x.clone();
            expect1[0] = -x[0].clone();
            expect1[n - 1] = -x[n - 1].clone();
            assert_eq!(w1.apply(&x), expect1);
            let w2 = dn.center_to_weyl(3);
            let expect2: Vec<Rational> = x.iter().rev().map(|v| -v.clone()).collect();
            assert_eq!(w2.apply(&x), expect2);
        }
    }

    #[test]
    fn dual_weights() {
        let a2 = d("A2");
        assert_eq!(a2.dual_weight(&WeightVector(vec![1, 0])), WeightVector(vec![0, 1]));
        let a1 = d("A1");
        assert_eq!(a1.dual_weight(&WeightVector(vec![1])), WeightVector(vec![1]));
        let d5 = d("D5");
        assert_eq!(d5.dual_weight(&WeightVector(vec![0, 0, 0, 1, 0])), WeightVector(vec![0, 0, 0, 0, 1]));
    }

    #[test]
    fn weyl_dimension_examples() {
        assert_eq!(d("A2").weyl_dimension(&WeightVector(vec![1, 0])), BigInt::from(3));
        assert_eq!(d("G2").weyl_dimension(&WeightVector(vec![1, 0])), BigInt::from(7));
        assert_eq!(d("E8").weyl_dimension(&WeightVector(vec![0, 0, 0, 0, 0, 0, 0, 1])), BigInt::from(248));
    }
}
