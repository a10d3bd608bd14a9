//! Semisimple simply connected groups as products of simple factors, their
//! centers, and subgroups of the center.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::CenterError;
use crate::root_datum::{LieType, RootDatum, WeightVector};

/// `G = G_1 x ... x G_s`; weights are concatenated factor by factor.
#[derive(Clone)]
pub struct Group {
    factors: Vec<Arc<RootDatum>>,
    offsets: Vec<usize>,
}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group({self})")
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.factors.iter().map(|d| d.lie_type().to_string()).collect();
        write!(f, "{}", names.join("x"))
    }
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.types() == other.types()
    }
}

impl Eq for Group {}

impl Group {
    pub fn new(types: &[LieType]) -> Self {
        assert!(!types.is_empty(), "a group needs at least one factor");
        let factors: Vec<Arc<RootDatum>> = types.iter().map(|&t| RootDatum::shared(t)).collect();
        let mut offsets = Vec::with_capacity(factors.len() + 1);
        let mut acc = 0;
        for d in &factors {
            offsets.push(acc);
            acc += d.rank();
        }
        offsets.push(acc);
        Group { factors, offsets }
    }

    pub fn simple(t: LieType) -> Self {
        Group::new(&[t])
    }

    pub fn factors(&self) -> &[Arc<RootDatum>] {
        &self.factors
    }

    pub fn factor(&self, j: usize) -> &RootDatum {
        &self.factors[j]
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn types(&self) -> Vec<LieType> {
        self.factors.iter().map(|d| d.lie_type()).collect()
    }

    pub fn rank(&self) -> usize {
        self.offsets[self.factors.len()]
    }

    pub fn num_positive_roots(&self) -> usize {
        self.factors.iter().map(|d| d.num_positive_roots()).sum()
    }

    /// Split a concatenated weight into per-factor weights.
    pub fn split(&self, w: &WeightVector) -> Vec<WeightVector> {
        (0..self.factors.len()).map(|j| WeightVector(w.0[self.offsets[j]..self.offsets[j + 1]].to_vec())).collect()
    }

    pub fn join(parts: &[WeightVector]) -> WeightVector {
        WeightVector(parts.iter().flat_map(|p| p.0.iter().copied()).collect())
    }

    pub fn factor_range(&self, j: usize) -> std::ops::Range<usize> {
        self.offsets[j]..self.offsets[j + 1]
    }

    /// Level weights for per-factor levels, in lexicographic order of the
    /// concatenated coordinates.
    pub fn level_weights(&self, levels: &[u32]) -> Vec<WeightVector> {
        let lists: Vec<Vec<WeightVector>> =
            self.factors.iter().zip(levels).map(|(d, &k)| d.level_weights(k)).collect();
        let mut out = vec![WeightVector(Vec::new())];
        for list in &lists {
            out = out.iter().flat_map(|p| list.iter().map(move |w| p.add_concat(w))).collect();
        }
        out
    }

    pub fn is_level_weight(&self, w: &WeightVector, levels: &[u32]) -> bool {
        w.rank() == self.rank()
            && self.split(w).iter().zip(&self.factors).zip(levels).all(|((p, d), &k)| d.is_level_weight(p, k))
    }

    pub fn dual_weight(&self, w: &WeightVector) -> WeightVector {
        let parts: Vec<WeightVector> =
            self.split(w).iter().zip(&self.factors).map(|(p, d)| d.dual_weight(p)).collect();
        Group::join(&parts)
    }

    pub fn center_order(&self) -> usize {
        self.factors.iter().map(|d| d.center_order()).product()
    }

    pub fn identity(&self) -> CenterElement {
        CenterElement(vec![0; self.factors.len()])
    }

    pub fn center_elements(&self) -> Vec<CenterElement> {
        let mut out = vec![Vec::new()];
        for d in &self.factors {
            out = out
                .iter()
                .flat_map(|p: &Vec<usize>| {
                    (0..d.center_order()).map(move |i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
        }
        out.into_iter().map(CenterElement).collect()
    }

    pub fn check_element(&self, g: &CenterElement) -> Result<(), CenterError> {
        if g.0.len() != self.factors.len() {
            return Err(CenterError::BadElement { factor: g.0.len(), index: usize::MAX });
        }
        for (j, (&i, d)) in g.0.iter().zip(&self.factors).enumerate() {
            if i >= d.center_order() {
                return Err(CenterError::BadElement { factor: j, index: i });
            }
        }
        Ok(())
    }

    pub fn mul(&self, a: &CenterElement, b: &CenterElement) -> CenterElement {
        CenterElement(self.factors.iter().enumerate().map(|(j, d)| d.center_mul(a.0[j], b.0[j])).collect())
    }

    pub fn inverse(&self, a: &CenterElement) -> CenterElement {
        CenterElement(self.factors.iter().enumerate().map(|(j, d)| d.center_inverse(a.0[j])).collect())
    }

    pub fn order_of(&self, a: &CenterElement) -> usize {
        let id = self.identity();
        let mut cur = a.clone();
        let mut n = 1;
        while cur != id {
            cur = self.mul(&cur, a);
            n += 1;
        }
        n
    }

    /// Subgroup generated by `gens`.
    pub fn subgroup(&self, gens: &[CenterElement]) -> Result<CenterSubgroup, CenterError> {
        for g in gens {
            self.check_element(g)?;
        }
        let mut elems: BTreeSet<CenterElement> = BTreeSet::new();
        elems.insert(self.identity());
        loop {
            let current: Vec<CenterElement> = elems.iter().cloned().collect();
            let before = elems.len();
            for a in &current {
                for g in gens {
                    elems.insert(self.mul(a, g));
                }
            }
            if elems.len() == before {
                break;
            }
        }
        let gens: Vec<CenterElement> = gens.iter().filter(|g| **g != self.identity()).cloned().collect();
        Ok(CenterSubgroup { elements: elems.into_iter().collect(), generators: gens })
    }

    pub fn trivial_subgroup(&self) -> CenterSubgroup {
        CenterSubgroup { elements: vec![self.identity()], generators: Vec::new() }
    }

    pub fn full_center(&self) -> CenterSubgroup {
        let gens = self.center_elements();
        self.subgroup(&gens).expect("valid elements")
    }

    /// Every subgroup of `Z(G)`, each once, ordered by size then elements.
    pub fn all_subgroups(&self) -> Vec<CenterSubgroup> {
        let all = self.center_elements();
        let mut found: BTreeSet<Vec<CenterElement>> = BTreeSet::new();
        let mut out: Vec<CenterSubgroup> = Vec::new();
        let mut frontier = vec![self.trivial_subgroup()];
        found.insert(frontier[0].elements.clone());
        while let Some(h) = frontier.pop() {
            for g in &all {
                if h.contains(g) {
                    continue;
                }
                let mut gens = h.generators.clone();
                gens.push(g.clone());
                let bigger = self.subgroup(&gens).expect("valid elements");
                if found.insert(bigger.elements.clone()) {
                    frontier.push(bigger);
                }
            }
            out.push(h);
        }
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.elements.cmp(&b.elements)));
        out
    }

    /// Image of `gamma` under projection to factor `j`, as a subgroup of `Z(G_j)`.
    pub fn projection_order(&self, gamma: &CenterSubgroup, j: usize) -> usize {
        gamma.elements.iter().map(|g| g.0[j]).collect::<BTreeSet<_>>().len()
    }
}

impl WeightVector {
    fn add_concat(&self, other: &WeightVector) -> WeightVector {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        WeightVector(v)
    }
}

/// An element of `Z(G_1) x ... x Z(G_s)`: one center index per factor
/// (index 0 is the identity; see [`RootDatum::center_coweight_reps`]).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CenterElement(pub Vec<usize>);

impl fmt::Display for CenterElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterSubgroup {
    elements: Vec<CenterElement>,
    generators: Vec<CenterElement>,
}

impl CenterSubgroup {
    pub fn elements(&self) -> &[CenterElement] {
        &self.elements
    }

    pub fn generators(&self) -> &[CenterElement] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn contains(&self, g: &CenterElement) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn index_of(&self, g: &CenterElement) -> Option<usize> {
        self.elements.binary_search(g).ok()
    }

    /// Subgroup of the elements satisfying `keep` (caller guarantees closure).
    pub fn filter(&self, keep: impl Fn(&CenterElement) -> bool) -> CenterSubgroup {
        let elements: Vec<CenterElement> = self.elements.iter().filter(|g| keep(g)).cloned().collect();
        let generators = elements.iter().filter(|g| g.0.iter().any(|&i| i != 0)).cloned().collect();
        CenterSubgroup { elements, generators }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &[&str]) -> Group {
        Group::new(&s.iter().map(|x| x.parse().unwrap()).collect::<Vec<_>>())
    }

    #[test]
    fn subgroup_counts() {
        assert_eq!(g(&["A1"]).all_subgroups().len(), 2);
        assert_eq!(g(&["A3"]).all_subgroups().len(), 3);
        assert_eq!(g(&["A5"]).all_subgroups().len(), 4);
        // Z2 x Z2 has five subgroups
        assert_eq!(g(&["D4"]).all_subgroups().len(), 5);
        assert_eq!(g(&["A1", "A1"]).all_subgroups().len(), 5);
        assert_eq!(g(&["G2"]).all_subgroups().len(), 1);
    }

    #[test]
    fn abstract_center_groups() {
        let d4 = g(&["D4"]);
        assert!(d4.center_elements().iter().all(|x| d4.order_of(x) <= 2));
        let d5 = g(&["D5"]);
        assert_eq!(d5.center_elements().iter().map(|x| d5.order_of(x)).max(), Some(4));
        let a3 = g(&["A3"]);
        assert_eq!(a3.order_of(&CenterElement(vec![1])), 4);
    }

    #[test]
    fn diagonal_subgroup_of_product() {
        let gg = g(&["A1", "A1"]);
        let diag = gg.subgroup(&[CenterElement(vec![1, 1])]).unwrap();
        assert_eq!(diag.len(), 2);
        assert_eq!(gg.projection_order(&diag, 0), 2);
        assert!(gg.subgroup(&[CenterElement(vec![2, 0])]).is_err());
    }

    #[test]
    fn product_level_weights() {
        let gg = g(&["A1", "A2"]);
        let w = gg.level_weights(&[1, 1]);
        assert_eq!(w.len(), 6);
        assert_eq!(w[0], WeightVector(vec![0, 0, 0]));
        assert!(w.iter().all(|x| gg.is_level_weight(x, &[1, 1])));
        assert_eq!(gg.split(&w[5]), vec![WeightVector(vec![1]), WeightVector(vec![1, 0])]);
    }
}
