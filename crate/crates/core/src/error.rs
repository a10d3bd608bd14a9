use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootDatumError {
    #[error("invalid Lie type {family}{rank}")]
    InvalidType { family: char, rank: usize },
    #[error("cannot parse Lie type `{0}`")]
    Parse(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Weyl group of order {order} exceeds the enumeration cap {cap}; use the Freudenthal path")]
    GroupTooLarge { order: u128, cap: u128 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CycloError {
    #[error("division by zero in Q(zeta_{0})")]
    DivisionByZero(u64),
    #[error("value is not rational (approximately {re} + {im}i)")]
    NotRational { re: f64, im: f64 },
    #[error("value {0} is not an integer")]
    NotInteger(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CharacterError {
    #[error("singular point: the Weyl denominator vanishes")]
    Singular,
    #[error("representation of dimension {dim} exceeds the Freudenthal cap {cap}")]
    DimensionCap { dim: u128, cap: u128 },
    #[error("weight {0} is not dominant")]
    NotDominant(String),
    #[error("exceptional weight absent: dual Coxeter number {c} does not divide level {k}")]
    ExceptionalAbsent { c: u32, k: u32 },
    #[error(transparent)]
    RootDatum(#[from] RootDatumError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CenterError {
    #[error("center element index {index} out of range for factor {factor}")]
    BadElement { factor: usize, index: usize },
    #[error("character data inconsistent with the group law of the center subgroup")]
    InconsistentCharacter,
    #[error("expected {expected} character slots, got {got}")]
    SlotCount { expected: usize, got: usize },
    #[error("weight {0} is not a level weight")]
    NotLevelWeight(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerlindeError {
    #[error("marking {0} is not a level-k weight")]
    InvalidMarking(String),
    #[error("level {level} is not admissible for factor {factor} (needs a multiple of {required})")]
    InadmissibleLevel { factor: usize, level: u32, required: u32 },
    #[error("sum is not an integer: {exact} (~{approx})")]
    NonIntegral { exact: String, approx: f64 },
    #[error("unsupported genus {genus} for this formula: {reason}")]
    UnsupportedGenus { genus: u32, reason: &'static str },
    #[error("at most one marking is supported for quotient groups")]
    TooManyMarkings,
    #[error("conjugacy-class formula gives {conjclass} but the component sum gives {components}")]
    DualPathMismatch { conjclass: String, components: String },
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("expected {expected} levels, got {got}")]
    LevelCount { expected: usize, got: usize },
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error(transparent)]
    Center(#[from] CenterError),
    #[error(transparent)]
    Cyclo(#[from] CycloError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixedPointError {
    #[error("matrix is not in {group}: residual {residual:e}")]
    NotInGroup { group: String, residual: f64 },
    #[error("elements belong to different groups")]
    GroupMismatch,
    #[error("inputs do not commute: residual {0:e}")]
    NonCommuting(f64),
    #[error("eigenspace clustering failed: {0}")]
    Clustering(String),
    #[error("eigenvalue {0} lies on the square-root branch cut")]
    BranchCut(f64),
    #[error("Clifford model needs an even N, got {0}")]
    OddRank(usize),
    #[error("Clifford model supports N <= 8, got {0}")]
    RankCap(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("cannot parse {what} `{input}`: {reason}")]
    Parse { what: &'static str, input: String, reason: String },
    #[error(transparent)]
    Center(#[from] CenterError),
    #[error(transparent)]
    Verlinde(#[from] VerlindeError),
}

impl QueryError {
    pub fn parse(what: &'static str, input: &str, reason: impl Into<String>) -> Self {
        QueryError::Parse { what, input: input.to_string(), reason: reason.into() }
    }
}
