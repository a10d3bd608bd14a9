//! The center `Z(G)` acting on the alcove, on level weights, and on
//! characters; characters of `Gamma^{2h}`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclotomic::CycloNumber;
use crate::error::CenterError;
use crate::group::{CenterElement, CenterSubgroup, Group};
use crate::linalg::{self, Rational};
use crate::root_datum::{RootDatum, WeightVector, WeylElement};

/// Alcove automorphism of one center element: `lambda -> M lambda + k * offset`.
#[derive(Clone, Debug)]
struct AlcoveMap {
    matrix: Vec<Vec<i64>>,
    offset: Vec<Rational>,
}

/// Per-factor center data needed by the action and the pairing.
#[derive(Clone, Debug)]
pub struct CenterData {
    group: Group,
    maps: Vec<Vec<AlcoveMap>>,
    // pairings[j][g][i] = <omega_i, xi_g> for factor j, as numerator over pairing_den[j]
    pairings: Vec<Vec<Vec<i64>>>,
    pairing_den: Vec<i64>,
}

impl CenterData {
    pub fn new(group: &Group) -> Self {
        let mut maps = Vec::new();
        let mut pairings = Vec::new();
        let mut pairing_den = Vec::new();
        for d in group.factors() {
            maps.push(
                (0..d.center_order())
                    .map(|g| {
                        let (matrix, offset) = d.center_alcove_map(g);
                        AlcoveMap { matrix, offset }
                    })
                    .collect(),
            );
            let vals: Vec<Vec<Rational>> = d
                .center_coweight_reps()
                .iter()
                .map(|xi| d.fundamental_weights().iter().map(|om| d.inner(om, xi)).collect())
                .collect();
            let den = linalg::lcm_of_denominators(vals.iter().flatten());
            let den_i: i64 = den.clone().try_into().expect("small denominator");
            pairings.push(
                vals.iter()
                    .map(|row| {
                        row.iter()
                            .map(|v| linalg::to_i64(&(v * Rational::from_integer(den.clone()))).expect("integral"))
                            .collect()
                    })
                    .collect(),
            );
            pairing_den.push(den_i);
        }
        CenterData { group: group.clone(), maps, pairings, pairing_den }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    /// Action of `gamma` on a level weight with per-factor levels.
    pub fn act(&self, gamma: &CenterElement, lambda: &WeightVector, levels: &[u32]) -> WeightVector {
        let parts = self.group.split(lambda);
        let out: Vec<WeightVector> = parts
            .iter()
            .enumerate()
            .map(|(j, p)| self.act_factor(j, gamma.0[j], p, levels[j]))
            .collect();
        Group::join(&out)
    }

    pub fn act_factor(&self, j: usize, g: usize, lambda: &WeightVector, k: u32) -> WeightVector {
        if g == 0 {
            return lambda.clone();
        }
        let m = &self.maps[j][g];
        let kk = Rational::from_integer(BigInt::from(k));
        WeightVector(
            m.matrix
                .iter()
                .zip(&m.offset)
                .map(|(row, o)| {
                    let lin: i64 = row.iter().zip(&lambda.0).map(|(a, b)| a * b).sum();
                    lin + linalg::to_i64(&(o * &kk)).expect("center action preserves integrality")
                })
                .collect(),
        )
    }

    /// `lambda(xi_gamma) mod 1` as a rational in `[0, 1)`.
    pub fn pairing_fraction(&self, gamma: &CenterElement, lambda: &WeightVector) -> Rational {
        let parts = self.group.split(lambda);
        let mut q = Rational::zero();
        for (j, p) in parts.iter().enumerate() {
            let num: i64 = self.pairings[j][gamma.0[j]].iter().zip(&p.0).map(|(a, b)| a * b).sum();
            q += Rational::new(BigInt::from(num), BigInt::from(self.pairing_den[j]));
        }
        q.clone() - q.floor()
    }

    /// `gamma^lambda = e^{2 pi i lambda(xi_gamma)}`.
    pub fn gamma_pairing(&self, gamma: &CenterElement, lambda: &WeightVector) -> CycloNumber {
        root_of_unity_at(&self.pairing_fraction(gamma, lambda))
    }

    pub fn stabilizer(&self, gamma: &CenterSubgroup, lambda: &WeightVector, levels: &[u32]) -> CenterSubgroup {
        gamma.filter(|g| self.act(g, lambda, levels) == *lambda)
    }

    /// Level weights that are weights of the quotient torus.
    pub fn restricted_level_weights(&self, gamma: &CenterSubgroup, levels: &[u32]) -> Vec<WeightVector> {
        let out: Vec<WeightVector> = self
            .group
            .level_weights(levels)
            .into_iter()
            .filter(|l| gamma.generators().iter().all(|g| self.pairing_fraction(g, l).is_zero()))
            .collect();
        debug_assert!(out.iter().all(|l| gamma
            .elements()
            .iter()
            .all(|g| out.binary_search(&self.act(g, l, levels)).is_ok())));
        out
    }

    /// One representative (the lexicographically smallest) per orbit, with
    /// orbit sizes, in order of first appearance.
    pub fn orbits(&self, gamma: &CenterSubgroup, weights: &[WeightVector], levels: &[u32]) -> Vec<(WeightVector, usize)> {
        let mut seen: BTreeSet<WeightVector> = BTreeSet::new();
        let mut out = Vec::new();
        for w in weights {
            if seen.contains(w) {
                continue;
            }
            let orbit: BTreeSet<WeightVector> = gamma.elements().iter().map(|g| self.act(g, w, levels)).collect();
            let rep = orbit.iter().next().expect("nonempty orbit").clone();
            out.push((rep, orbit.len()));
            seen.extend(orbit);
        }
        out
    }
}

/// `e^{2 pi i q}` for rational `q`.
pub fn root_of_unity_at(q: &Rational) -> CycloNumber {
    let den = q.denom().clone();
    let n: u64 = den.clone().try_into().expect("small root of unity");
    let a: i64 = q.numer().mod_floor(&den).try_into().expect("small exponent");
    CycloNumber::root_of_unity(n, a)
}

/// `w_gamma` per factor.
pub fn center_to_weyl(group: &Group, gamma: &CenterElement) -> Vec<WeylElement> {
    group.factors().iter().zip(&gamma.0).map(|(d, &g)| d.center_to_weyl(g)).collect()
}

/// The action computed directly: `k * reduce(lambda/k + xi_gamma)`.
pub fn act_by_reduction(d: &RootDatum, g: usize, lambda: &WeightVector, k: u32) -> WeightVector {
    if k == 0 {
        return lambda.clone();
    }
    let kk = Rational::from_integer(BigInt::from(k));
    let x = linalg::scale(&(Rational::one() / &kk), &d.weight_to_ambient(lambda));
    let red = d.affine_reduce(&linalg::add(&x, &d.center_coweight_reps()[g]));
    let y = linalg::scale(&kk, &red.reduced);
    d.ambient_to_weight(&y).expect("center action preserves the weight lattice")
}

/// A character of `Gamma^{2h}`: for each of the `2h` slots, the values on the
/// elements of `Gamma` (in subgroup order) as fractions `q` of `e^{2 pi i q}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterCharacter {
    slots: Vec<Vec<Rational>>,
}

impl CenterCharacter {
    pub fn trivial(gamma: &CenterSubgroup, genus: u32) -> Self {
        CenterCharacter { slots: vec![vec![Rational::zero(); gamma.len()]; 2 * genus as usize] }
    }

    /// Build from exponents: in slot `s`, generator `i` of `gamma` maps to
    /// `e^{2 pi i a_{s,i} / ord(g_i)}`.
    pub fn from_generator_exponents(
        group: &Group,
        gamma: &CenterSubgroup,
        genus: u32,
        exps: &[Vec<i64>],
    ) -> Result<Self, CenterError> {
        if exps.len() != 2 * genus as usize {
            return Err(CenterError::SlotCount { expected: 2 * genus as usize, got: exps.len() });
        }
        let slots = exps
            .iter()
            .map(|e| character_values(group, gamma, e))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CenterCharacter { slots })
    }

    pub fn from_slots(slots: Vec<Vec<Rational>>) -> Self {
        CenterCharacter { slots }
    }

    pub fn slots(&self) -> &[Vec<Rational>] {
        &self.slots
    }

    pub fn genus(&self) -> u32 {
        (self.slots.len() / 2) as u32
    }

    pub fn is_trivial(&self) -> bool {
        self.slots.iter().flatten().all(Zero::is_zero)
    }

    /// Value of slot `s` on `g` as a root of unity.
    pub fn value(&self, gamma: &CenterSubgroup, s: usize, g: &CenterElement) -> Option<CycloNumber> {
        gamma.index_of(g).map(|i| root_of_unity_at(&self.slots[s][i]))
    }
}

/// Values of the character of `gamma` sending generator `i` to
/// `e^{2 pi i e_i / ord(g_i)}`, checked for consistency with the group law.
pub fn character_values(group: &Group, gamma: &CenterSubgroup, e: &[i64]) -> Result<Vec<Rational>, CenterError> {
    let gens = gamma.generators();
    if e.len() != gens.len() {
        return Err(CenterError::SlotCount { expected: gens.len(), got: e.len() });
    }
    let mut val: BTreeMap<CenterElement, Rational> = BTreeMap::new();
    val.insert(group.identity(), Rational::zero());
    let mut frontier = vec![group.identity()];
    while let Some(x) = frontier.pop() {
        let vx = val[&x].clone();
        for (g, &a) in gens.iter().zip(e) {
            let y = group.mul(&x, g);
            let q = &vx + Rational::new(BigInt::from(a), BigInt::from(group.order_of(g) as i64));
            let q = q.clone() - q.floor();
            match val.get(&y) {
                Some(old) if *old != q => return Err(CenterError::InconsistentCharacter),
                Some(_) => {}
                None => {
                    val.insert(y.clone(), q);
                    frontier.push(y);
                }
            }
        }
    }
    Ok(gamma.elements().iter().map(|g| val[g].clone()).collect())
}

/// All characters of `gamma`, trivial first.
pub fn all_characters(group: &Group, gamma: &CenterSubgroup) -> Vec<Vec<Rational>> {
    let orders: Vec<i64> = gamma.generators().iter().map(|g| group.order_of(g) as i64).collect();
    let mut choices = vec![Vec::new()];
    for &o in &orders {
        choices = choices
            .iter()
            .flat_map(|c: &Vec<i64>| {
                (0..o).map(move |a| {
                    let mut v = c.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    let mut found: BTreeSet<Vec<Rational>> = BTreeSet::new();
    let mut out = Vec::new();
    for c in choices {
        if let Ok(v) = character_values(group, gamma, &c) {
            if found.insert(v.clone()) {
                out.push(v);
            }
        }
    }
    out
}

/// The trivial character together with, for each nontrivial character of
/// `gamma`, the character carrying it in the first slot only.
pub fn generating_characters(group: &Group, gamma: &CenterSubgroup, genus: u32) -> Vec<CenterCharacter> {
    let mut out = vec![CenterCharacter::trivial(gamma, genus)];
    if genus == 0 {
        return out;
    }
    for chi in all_characters(group, gamma).into_iter().skip(1) {
        let mut phi = CenterCharacter::trivial(gamma, genus);
        phi.slots[0] = chi;
        out.push(phi);
    }
    out
}

/// `epsilon(phi, lambda)`: 1 iff every slot of `phi` is trivial on `stab`.
pub fn epsilon(phi: &CenterCharacter, gamma: &CenterSubgroup, stab: &CenterSubgroup) -> u8 {
    let trivial = stab.elements().iter().all(|g| {
        let i = gamma.index_of(g).expect("stabilizer inside gamma");
        phi.slots.iter().all(|s| s[i].is_zero())
    });
    u8::from(trivial)
}

/// `sum_{gamma} gamma^lambda` as an integer (`#Gamma` or 0).
pub fn pairing_sum(cd: &CenterData, gamma: &CenterSubgroup, lambda: &WeightVector) -> CycloNumber {
    gamma.elements().iter().map(|g| cd.gamma_pairing(g, lambda)).fold(CycloNumber::zero(1), |a, b| &a + &b)
}

/// Convenience: exponent of `gamma` as an abstract group.
pub fn exponent(group: &Group, gamma: &CenterSubgroup) -> usize {
    gamma.elements().iter().map(|g| group.order_of(g)).fold(1, |a, b| a.lcm(&b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ratio;

    fn grp(s: &str) -> Group {
        Group::simple(s.parse().unwrap())
    }

    fn w(v: &[i64]) -> WeightVector {
        WeightVector(v.to_vec())
    }

    #[test]
    fn a1_center_is_the_reflection() {
        let g = grp("A1");
        let ws = center_to_weyl(&g, &CenterElement(vec![1]));
        assert_eq!(ws[0].sign(), -1);
        assert!(center_to_weyl(&g, &g.identity())[0].is_identity());
    }

    #[test]
    fn a1_action_on_level_weights() {
        let g = grp("A1");
        let cd = CenterData::new(&g);
        let z = CenterElement(vec![1]);
        for m in 0..=4 {
            assert_eq!(cd.act(&z, &w(&[m]), &[4]), w(&[4 - m]));
        }
        let gamma = g.full_center();
        assert_eq!(cd.stabilizer(&gamma, &w(&[2]), &[4]).len(), 2);
        assert!(cd.stabilizer(&gamma, &w(&[1]), &[4]).is_trivial());
    }

    #[test]
    fn fast_action_matches_reduction() {
        for t in ["A1", "A2", "A3", "B2", "B3", "C3", "D4", "D5", "E6", "E7"] {
            let g = grp(t);
            let d = g.factor(0);
            let cd = CenterData::new(&g);
            for k in [1u32, 2, 3] {
                for lam in d.level_weights(k) {
                    for z in 0..d.center_order() {
                        assert_eq!(cd.act_factor(0, z, &lam, k), act_by_reduction(d, z, &lam, k), "{t} {lam} {z}");
                    }
                }
            }
        }
    }

    #[test]
    fn weyl_map_is_an_injective_homomorphism() {
        for t in ["A3", "D4", "D5", "E6", "C2"] {
            let g = grp(t);
            let d = g.factor(0);
            for a in 0..d.center_order() {
                for b in 0..d.center_order() {
                    let ab = d.center_mul(a, b);
                    assert_eq!(d.center_to_weyl(ab), d.center_to_weyl(a).compose(&d.center_to_weyl(b)), "{t}");
                }
                assert_eq!(d.center_to_weyl(a).is_identity(), a == 0);
            }
        }
    }

    #[test]
    fn pairings() {
        let g = grp("A1");
        let cd = CenterData::new(&g);
        let z = CenterElement(vec![1]);
        assert_eq!(cd.gamma_pairing(&z, &w(&[1])), CycloNumber::from_integer(2, -1));
        assert!(cd.gamma_pairing(&z, &w(&[2])).is_one());
        assert!(cd.gamma_pairing(&g.identity(), &w(&[3])).is_one());
        assert_eq!(cd.pairing_fraction(&z, &w(&[3])), ratio(1, 2));
    }

    #[test]
    fn restricted_weights_and_orbits() {
        let g = grp("A1");
        let cd = CenterData::new(&g);
        let gamma = g.full_center();
        let r = cd.restricted_level_weights(&gamma, &[4]);
        assert_eq!(r, vec![w(&[0]), w(&[2]), w(&[4])]);
        assert_eq!(cd.orbits(&gamma, &r, &[4]), vec![(w(&[0]), 2), (w(&[2]), 1)]);

        let g3 = grp("A2");
        let cd3 = CenterData::new(&g3);
        let r3 = cd3.restricted_level_weights(&g3.full_center(), &[3]);
        assert!(r3.contains(&w(&[0, 0])) && r3.contains(&w(&[1, 1])));
        assert!(r3.iter().all(|x| (x.0[0] + 2 * x.0[1]) % 3 == 0));
    }

    #[test]
    fn characters_and_epsilon() {
        let g = grp("A1");
        let gamma = g.full_center();
        let chars = all_characters(&g, &gamma);
        assert_eq!(chars.len(), 2);
        let phi = CenterCharacter::from_generator_exponents(&g, &gamma, 1, &[vec![1], vec![0]]).unwrap();
        assert!(!phi.is_trivial());
        let full = gamma.clone();
        assert_eq!(epsilon(&phi, &gamma, &full), 0);
        assert_eq!(epsilon(&phi, &gamma, &g.trivial_subgroup()), 1);
        assert_eq!(epsilon(&CenterCharacter::trivial(&gamma, 2), &gamma, &full), 1);
        assert!(CenterCharacter::from_generator_exponents(&g, &gamma, 1, &[vec![1]]).is_err());
        assert_eq!(generating_characters(&g, &gamma, 2).len(), 2);

        let d4 = grp("D4");
        assert_eq!(all_characters(&d4, &d4.full_center()).len(), 4);
    }

    #[test]
    fn exceptional_weight_is_fixed() {
        for t in ["A2", "A3", "B3", "C2", "D4", "E6"] {
            let g = grp(t);
            let d = g.factor(0);
            let cd = CenterData::new(&g);
            let c = d.dual_coxeter();
            let lam0 = WeightVector(vec![1; d.rank()]);
            assert_eq!(cd.stabilizer(&g.full_center(), &lam0, &[c]).len(), d.center_order(), "{t}");
        }
    }
}
