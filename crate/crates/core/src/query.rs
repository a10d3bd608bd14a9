//! Textual queries: group names, center generators, markings, and the
//! dispatch from a [`QuerySpec`] to the index formulas.
//!
//! Group strings are products of factors joined by `x` or `×`. A factor is a
//! raw type (`A2`, `E_7`), a classical name (`SU(3)`, `Spin(8)`, `SO(5)`,
//! `Sp(2)`, `PSU(4)`, `PSp(3)`, `PSO(8)`), a cyclic quotient `SU(n)/Z_m`, or
//! any of these followed by `'` or `′` for the adjoint group.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::center::CenterCharacter;
use crate::error::QueryError;
use crate::group::{CenterElement, CenterSubgroup, Group};
use crate::oracle;
use crate::root_datum::{Family, LieType, RootDatum, WeightVector};
use crate::verlinde::{
    min_level, verlinde_closed, verlinde_conjclass, verlinde_ns, verlinde_sc, Admissibility, QuotientQuery,
    VerlindeResult,
};

/// Which formula a query evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Simply connected cover, with markings.
    Sc,
    /// Quotient `G/Gamma`, one marking, character `phi`.
    Ns,
    /// Quotient, component of holonomy in the class of the marking.
    Conjclass,
    /// Simply connected cover, no markings.
    Closed,
}

impl FromStr for Mode {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sc" => Ok(Mode::Sc),
            "ns" => Ok(Mode::Ns),
            "conjclass" => Ok(Mode::Conjclass),
            "closed" => Ok(Mode::Closed),
            _ => Err(QueryError::parse("mode", s, "expected sc, ns, conjclass or closed")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Sc => "sc",
            Mode::Ns => "ns",
            Mode::Conjclass => "conjclass",
            Mode::Closed => "closed",
        };
        f.write_str(s)
    }
}

/// A group name resolved to its simply connected cover and the generators
/// of the central subgroup being divided out.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedGroup {
    pub group: Group,
    pub generators: Vec<CenterElement>,
}

impl NamedGroup {
    pub fn gamma(&self) -> CenterSubgroup {
        self.group.subgroup(&self.generators).expect("registry emits valid elements")
    }
}

struct Factor {
    types: Vec<LieType>,
    /// Generators as index vectors over `types`.
    gens: Vec<Vec<usize>>,
}

fn lie(family: Family, rank: usize, input: &str) -> Result<LieType, QueryError> {
    LieType::new(family, rank).map_err(|e| QueryError::parse("group", input, e.to_string()))
}

fn full_center_gens(types: &[LieType]) -> Vec<Vec<usize>> {
    let g = Group::new(types);
    g.center_elements().into_iter().filter(|e| *e != g.identity()).map(|e| e.0).collect()
}

fn simply_connected(name: &str, n: usize, input: &str) -> Result<Vec<LieType>, QueryError> {
    let bad = |why: &str| QueryError::parse("group", input, why.to_string());
    match name {
        "SU" if n >= 2 => Ok(vec![lie(Family::A, n - 1, input)?]),
        "SU" => Err(bad("SU(n) needs n >= 2")),
        "SP" if n == 1 => Ok(vec![lie(Family::A, 1, input)?]),
        "SP" if n >= 2 => Ok(vec![lie(Family::C, n, input)?]),
        "SP" => Err(bad("Sp(n) needs n >= 1")),
        "SPIN" => match n {
            3 => Ok(vec![lie(Family::A, 1, input)?]),
            4 => Ok(vec![lie(Family::A, 1, input)?, lie(Family::A, 1, input)?]),
            5 => Ok(vec![lie(Family::B, 2, input)?]),
            6 => Ok(vec![lie(Family::A, 3, input)?]),
            n if n >= 7 && n % 2 == 1 => Ok(vec![lie(Family::B, (n - 1) / 2, input)?]),
            n if n >= 8 => Ok(vec![lie(Family::D, n / 2, input)?]),
            _ => Err(bad("Spin(n) needs n >= 3")),
        },
        _ => Err(bad("unknown group name")),
    }
}

/// Kernel of `Spin(n) -> SO(n)` as an index vector.
fn so_kernel(n: usize) -> Vec<usize> {
    match n {
        4 => vec![1, 1],
        // -1 in SU(4) is the square of the generator
        6 => vec![2],
        // the element attached to the vector node (index 1) for B and D
        _ => vec![1],
    }
}

fn parse_factor(raw: &str) -> Result<Factor, QueryError> {
    let input = raw.trim();
    if input.is_empty() {
        return Err(QueryError::parse("group", raw, "empty factor"));
    }
    let (body, adjoint) = match input.strip_suffix('\'').or_else(|| input.strip_suffix('′')) {
        Some(b) => (b.trim(), true),
        None => (input, false),
    };
    let mut f = parse_plain_factor(body)?;
    if adjoint {
        f.gens = full_center_gens(&f.types);
    }
    Ok(f)
}

fn parse_plain_factor(input: &str) -> Result<Factor, QueryError> {
    if let Ok(t) = input.parse::<LieType>() {
        return Ok(Factor { types: vec![t], gens: Vec::new() });
    }
    let (head, quotient) = match input.split_once('/') {
        Some((h, q)) => (h.trim(), Some(q.trim())),
        None => (input, None),
    };
    let open = head.find('(').ok_or_else(|| QueryError::parse("group", input, "expected NAME(n) or a Lie type"))?;
    let close = head.rfind(')').filter(|&c| c == head.len() - 1).ok_or_else(|| {
        QueryError::parse("group", input, "missing closing parenthesis")
    })?;
    let name = head[..open].trim().to_ascii_uppercase();
    let n: usize = head[open + 1..close]
        .trim()
        .parse()
        .map_err(|_| QueryError::parse("group", input, "expected an integer inside the parentheses"))?;

    let f = match name.as_str() {
        "SU" | "SP" | "SPIN" => Factor { types: simply_connected(&name, n, input)?, gens: Vec::new() },
        "PSU" | "PSP" => {
            let types = simply_connected(&name[1..], n, input)?;
            let gens = full_center_gens(&types);
            Factor { types, gens }
        }
        "SO" | "PSO" => {
            let types = simply_connected("SPIN", n, input)?;
            let gens = if name == "PSO" && n.is_multiple_of(2) { full_center_gens(&types) } else { vec![so_kernel(n)] };
            Factor { types, gens }
        }
        _ => return Err(QueryError::parse("group", input, format!("unknown group name `{}`", &head[..open]))),
    };
    match quotient {
        None => Ok(f),
        Some(q) => {
            if name != "SU" {
                return Err(QueryError::parse("group", input, "cyclic quotients are supported for SU(n) only"));
            }
            let m: usize = q
                .trim_start_matches(['Z', 'z'])
                .trim_start_matches('_')
                .parse()
                .map_err(|_| QueryError::parse("group", input, "expected a quotient of the form Z_m"))?;
            if m == 0 || !n.is_multiple_of(m) {
                return Err(QueryError::parse("group", input, format!("Z_{m} is not a subgroup of Z_{n}")));
            }
            let gens = if m == 1 { Vec::new() } else { vec![vec![(n / m) % n]] };
            Ok(Factor { types: f.types, gens })
        }
    }
}

/// Parses a group string into the simply connected cover and `Gamma`.
pub fn parse_group(input: &str) -> Result<NamedGroup, QueryError> {
    let parts: Vec<&str> = input.split(['x', '×']).collect();
    let factors = parts.iter().map(|p| parse_factor(p)).collect::<Result<Vec<_>, _>>()?;
    let types: Vec<LieType> = factors.iter().flat_map(|f| f.types.iter().copied()).collect();
    let group = Group::new(&types);
    let mut generators = Vec::new();
    let mut offset = 0;
    for f in &factors {
        for g in &f.gens {
            let mut e = vec![0; types.len()];
            e[offset..offset + g.len()].copy_from_slice(g);
            generators.push(CenterElement(e));
        }
        offset += f.types.len();
    }
    Ok(NamedGroup { group, generators })
}

/// Center generators written as `i,j;k,l`: one index per factor, `;`
/// between generators. Indices refer to the factor's center elements, 0
/// being the identity.
pub fn parse_center_generators(group: &Group, input: &str) -> Result<Vec<CenterElement>, QueryError> {
    let mut out = Vec::new();
    for part in input.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let idx = part
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| QueryError::parse("center generator", part, "expected comma-separated indices"))?;
        if idx.len() != group.num_factors() {
            return Err(QueryError::parse(
                "center generator",
                part,
                format!("expected {} indices, one per factor", group.num_factors()),
            ));
        }
        let e = CenterElement(idx);
        group.check_element(&e)?;
        out.push(e);
    }
    Ok(out)
}

/// Integer rows separated by `;`, entries by `,`.
pub fn parse_int_rows(what: &'static str, input: &str) -> Result<Vec<Vec<i64>>, QueryError> {
    input
        .split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| QueryError::parse(what, row, "expected comma-separated integers"))
        })
        .collect()
}

/// Markings in fundamental-weight coordinates. All integers are read in
/// order and cut into vectors of length `rank`, so for rank one `1,1` is two
/// markings; `;` may be used to separate markings for readability.
pub fn parse_markings(rank: usize, input: &str) -> Result<Vec<Vec<i64>>, QueryError> {
    let rows = parse_int_rows("markings", input)?;
    if input.contains(';') && rows.iter().any(|r| r.len() != rank) {
        return Err(QueryError::parse("markings", input, format!("each marking needs {rank} coordinates")));
    }
    let flat: Vec<i64> = rows.into_iter().flatten().collect();
    if !flat.len().is_multiple_of(rank) {
        return Err(QueryError::parse("markings", input, format!("coordinate count is not a multiple of the rank {rank}")));
    }
    Ok(flat.chunks(rank).map(<[i64]>::to_vec).collect())
}

/// A query as read from the command line or a config file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub group: String,
    pub level: Vec<u32>,
    pub genus: u32,
    #[serde(default)]
    pub markings: Vec<Vec<i64>>,
    /// Overrides the subgroup implied by the group name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<Vec<usize>>>,
    /// Exponents per slot (`2h` rows), one per generator of `Gamma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub rule: Admissibility,
}

/// A [`QuerySpec`] with every name resolved.
#[derive(Clone, Debug)]
pub struct ResolvedQuery {
    pub group: Group,
    pub gamma: CenterSubgroup,
    pub levels: Vec<u32>,
    pub genus: u32,
    pub markings: Vec<WeightVector>,
    pub phi: Option<CenterCharacter>,
    pub mode: Mode,
    pub rule: Admissibility,
}

impl QuerySpec {
    pub fn resolve(&self) -> Result<ResolvedQuery, QueryError> {
        let named = parse_group(&self.group)?;
        let group = named.group;
        let gens = match &self.center {
            Some(rows) => {
                let gens: Vec<CenterElement> = rows.iter().map(|r| CenterElement(r.clone())).collect();
                for g in &gens {
                    if g.0.len() != group.num_factors() {
                        return Err(QueryError::parse("center generator", &format!("{:?}", g.0), "one index per factor"));
                    }
                    group.check_element(g)?;
                }
                gens
            }
            None => named.generators,
        };
        let gamma = group.subgroup(&gens)?;
        let levels = match self.level.len() {
            0 => return Err(QueryError::parse("level", "", "at least one level is required")),
            1 => vec![self.level[0]; group.num_factors()],
            n if n == group.num_factors() => self.level.clone(),
            n => {
                return Err(QueryError::parse(
                    "level",
                    &format!("{:?}", self.level),
                    format!("{n} levels for {} factors", group.num_factors()),
                ))
            }
        };
        let rank = group.rank();
        let mut markings = Vec::with_capacity(self.markings.len());
        for m in &self.markings {
            if m.len() != rank {
                return Err(QueryError::parse("markings", &format!("{m:?}"), format!("expected {rank} coordinates")));
            }
            markings.push(WeightVector(m.clone()));
        }
        let mode = self.mode.unwrap_or(match (gamma.is_trivial(), markings.is_empty()) {
            (false, _) => Mode::Ns,
            (true, true) => Mode::Closed,
            (true, false) => Mode::Sc,
        });
        let phi = match &self.phi {
            Some(rows) => Some(CenterCharacter::from_generator_exponents(&group, &gamma, self.genus, rows)?),
            None => None,
        };
        Ok(ResolvedQuery { group, gamma, levels, genus: self.genus, markings, phi, mode, rule: self.rule })
    }
}

impl ResolvedQuery {
    fn quotient(&self) -> Result<QuotientQuery, QueryError> {
        let mu = match self.markings.as_slice() {
            [] => WeightVector::zero(self.group.rank()),
            [m] => m.clone(),
            _ => return Err(crate::error::VerlindeError::TooManyMarkings.into()),
        };
        let mut q = QuotientQuery::new(&self.group, &self.gamma, &self.levels, self.genus, mu).with_rule(self.rule);
        if let Some(phi) = &self.phi {
            q = q.with_phi(phi.clone());
        }
        Ok(q)
    }

    pub fn run(&self) -> Result<VerlindeResult, QueryError> {
        let out = match self.mode {
            Mode::Sc => verlinde_sc(&self.group, &self.levels, self.genus, &self.markings)?,
            Mode::Closed => {
                if !self.markings.is_empty() {
                    return Err(QueryError::parse("markings", "", "closed mode takes no markings"));
                }
                verlinde_closed(&self.group, &self.levels, self.genus)?
            }
            Mode::Ns => verlinde_ns(&self.quotient()?)?,
            Mode::Conjclass => verlinde_conjclass(&self.quotient()?)?,
        };
        Ok(out)
    }
}

/// Everything `compute` reports; serializes deterministically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComputeOutput {
    pub group: String,
    pub cover: String,
    pub center_subgroup_order: usize,
    pub levels: Vec<u32>,
    pub genus: u32,
    pub mode: Mode,
    pub markings: Vec<WeightVector>,
    pub result: VerlindeResult,
}

pub fn compute(spec: &QuerySpec) -> Result<ComputeOutput, QueryError> {
    let q = spec.resolve()?;
    let result = q.run()?;
    Ok(ComputeOutput {
        group: spec.group.clone(),
        cover: q.group.to_string(),
        center_subgroup_order: q.gamma.len(),
        levels: q.levels.clone(),
        genus: q.genus,
        mode: q.mode,
        markings: q.markings.clone(),
        result,
    })
}

/// One row of the minimal-level table for adjoint groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRow {
    pub lie_type: String,
    pub center_order: usize,
    /// Smallest admissible level from the level condition.
    pub computed: u32,
    /// Value from the published table.
    pub tabulated: Option<u32>,
}

impl LevelRow {
    pub fn agrees(&self) -> bool {
        self.tabulated == Some(self.computed)
    }
}

/// Minimal levels of `G/Z(G)` for every type with nontrivial center and
/// rank at most `max_rank` (E6 and E7 always included).
pub fn adjoint_level_table(max_rank: usize) -> Vec<LevelRow> {
    let mut types = Vec::new();
    for (family, lo) in [(Family::A, 1), (Family::B, 2), (Family::C, 2), (Family::D, 3)] {
        for r in lo..=max_rank.max(lo) {
            types.push(LieType::new(family, r).expect("valid rank"));
        }
    }
    types.push(LieType::new(Family::E, 6).expect("E6"));
    types.push(LieType::new(Family::E, 7).expect("E7"));
    types
        .into_iter()
        .map(|t| {
            let d = RootDatum::shared(t);
            LevelRow {
                lie_type: t.to_string(),
                center_order: d.center_order(),
                computed: min_level(&d, d.center_order(), Admissibility::Strict),
                tabulated: oracle::l0_table(t),
            }
        })
        .collect()
}

/// Minimal admissible level for each factor of a named quotient.
pub fn group_min_levels(named: &NamedGroup, rule: Admissibility) -> Vec<(String, u32)> {
    let gamma = named.gamma();
    named
        .group
        .factors()
        .iter()
        .enumerate()
        .map(|(j, d)| (d.lie_type().to_string(), min_level(d, named.group.projection_order(&gamma, j), rule)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center::CenterData;

    fn spec(group: &str, level: u32, genus: u32, mode: Option<Mode>) -> QuerySpec {
        QuerySpec {
            group: group.into(),
            level: vec![level],
            genus,
            markings: Vec::new(),
            center: None,
            phi: None,
            mode,
            rule: Admissibility::Strict,
        }
    }

    #[test]
    fn names_resolve() {
        let cases = [
            ("SU(3)", "A2", 1),
            ("PSU(3)", "A2", 3),
            ("A2'", "A2", 3),
            ("SO(3)", "A1", 2),
            ("Spin(8)", "D4", 1),
            ("SO(8)", "D4", 2),
            ("PSO(8)", "D4", 4),
            ("SO(5)", "B2", 2),
            ("SO(6)", "A3", 2),
            ("SO(4)", "A1xA1", 2),
            ("Sp(3)", "C3", 1),
            ("PSp(2)", "C2", 2),
            ("E7′", "E7", 2),
            ("SU(4)/Z_2", "A3", 2),
            ("SU(2) × SU(3)", "A1xA2", 1),
            ("SO(3)xPSU(3)", "A1xA2", 6),
        ];
        for (name, cover, order) in cases {
            let g = parse_group(name).unwrap();
            assert_eq!(g.group.to_string(), cover, "{name}");
            assert_eq!(g.gamma().len(), order, "{name}");
        }
        for bad in ["SU(1)", "Foo(3)", "SU(4)/Z_3", "A0", "SO(3", ""] {
            assert!(parse_group(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn so_kernel_fixes_the_vector_representation() {
        for n in [4, 5, 6, 7, 8, 9, 10] {
            let g = parse_group(&format!("SO({n})")).unwrap();
            let cd = CenterData::new(&g.group);
            let vector = match n {
                4 => WeightVector(vec![1, 1]),
                6 => WeightVector(vec![0, 1, 0]),
                _ => WeightVector::fundamental(g.group.rank(), 0),
            };
            for e in g.gamma().elements() {
                assert!(num_traits::Zero::is_zero(&cd.pairing_fraction(e, &vector)), "SO({n})");
            }
            let spin = WeightVector::fundamental(g.group.rank(), g.group.rank() - 1);
            if n != 4 && n != 6 {
                assert!(g.gamma().elements().iter().any(|e| !num_traits::Zero::is_zero(&cd.pairing_fraction(e, &spin))));
            }
        }
    }

    #[test]
    fn markings_and_generators() {
        assert_eq!(parse_markings(1, "1,1").unwrap(), vec![vec![1], vec![1]]);
        assert_eq!(parse_markings(2, "1,0;0,1").unwrap(), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(parse_markings(2, "1,0,0,1").unwrap(), vec![vec![1, 0], vec![0, 1]]);
        assert!(parse_markings(2, "1,0,1").is_err());
        assert!(parse_markings(2, "1;0,1").is_err());
        let g = Group::new(&["A1".parse().unwrap(), "A1".parse().unwrap()]);
        assert_eq!(parse_center_generators(&g, "1,1").unwrap(), vec![CenterElement(vec![1, 1])]);
        assert!(parse_center_generators(&g, "1").is_err());
        assert!(parse_center_generators(&g, "2,0").is_err());
    }

    #[test]
    fn documented_examples() {
        assert_eq!(compute(&spec("SO(3)", 4, 2, Some(Mode::Ns))).unwrap().result.value, 5.into());
        assert_eq!(compute(&spec("A1", 1, 2, Some(Mode::Closed))).unwrap().result.value, 4.into());
        let mut s = spec("A1", 2, 0, Some(Mode::Sc));
        s.markings = vec![vec![1], vec![1]];
        assert_eq!(compute(&s).unwrap().result.value, 1.into());
        assert_eq!(compute(&spec("SU(2)", 4, 2, None)).unwrap().mode, Mode::Closed);
        assert_eq!(compute(&spec("SO(3)", 4, 2, None)).unwrap().mode, Mode::Ns);
    }

    #[test]
    fn inadmissible_and_phi() {
        let err = compute(&spec("SO(3)", 2, 1, Some(Mode::Ns))).unwrap_err();
        assert!(matches!(err, QueryError::Verlinde(crate::error::VerlindeError::InadmissibleLevel { .. })));
        let mut s = spec("SO(3)", 2, 1, Some(Mode::Ns));
        s.rule = Admissibility::Weak;
        let err = compute(&s).unwrap_err();
        match err {
            QueryError::Verlinde(crate::error::VerlindeError::NonIntegral { exact, .. }) => assert_eq!(exact, "3/2"),
            e => panic!("{e}"),
        }
        let mut s = spec("SO(3)", 4, 1, Some(Mode::Ns));
        s.phi = Some(vec![vec![1], vec![0]]);
        assert!(compute(&s).is_ok());
        s.phi = Some(vec![vec![1]]);
        assert!(compute(&s).is_err());
    }

    #[test]
    fn level_table_matches() {
        let rows = adjoint_level_table(9);
        assert!(rows.iter().all(LevelRow::agrees));
        let e7 = rows.iter().find(|r| r.lie_type == "E7").unwrap();
        assert_eq!(e7.computed, 4);
        let so3 = parse_group("SO(3)").unwrap();
        assert_eq!(group_min_levels(&so3, Admissibility::Strict), vec![("A1".to_string(), 4)]);
        assert_eq!(group_min_levels(&so3, Admissibility::Weak), vec![("A1".to_string(), 2)]);
    }

    #[test]
    fn output_round_trips() {
        let out = compute(&spec("SO(3)", 4, 2, Some(Mode::Conjclass))).unwrap();
        let json = serde_json::to_string(&out).unwrap();
        let back: ComputeOutput = serde_json::from_str(&json).unwrap();
        assert_eq!(back, out);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        let toml_spec = "group = \"SO(3)\"\nlevel = [4]\ngenus = 2\nmode = \"ns\"\nrule = \"weak\"\n";
        let s: QuerySpec = toml::from_str(toml_spec).unwrap();
        assert_eq!(s.rule, Admissibility::Weak);
        assert_eq!(s.mode, Some(Mode::Ns));
    }
}
