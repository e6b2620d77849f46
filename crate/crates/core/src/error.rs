use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("m = {m} does not divide M = {big_m}")]
    DegreeNotDivisible { m: u32, big_m: u32 },
    #[error("field of order {order} is outside the supported range")]
    FieldTooLarge { order: u64 },
    #[error("no primitive {n}-th root of unity: {n} does not divide {group_order}")]
    NoSuchRoot { n: u64, group_order: u64 },
    #[error("gcd(n,p)≠1: p = {p} divides n = {n}")]
    NotCoprime { n: u64, p: u64 },
    #[error("cannot parse field element {0:?}")]
    BadElement(String),
    #[error("elements belong to different punctured lines")]
    RingMismatch,
    #[error("unknown puncture {0}")]
    UnknownPuncture(String),
    #[error("cover is not connected: {0}")]
    Disconnected(String),
    #[error("valuation of the zero element")]
    ZeroElement,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("e_rho = zeta_n^{s} is not in F_q")]
    RhoNotInFq { s: i64 },
    #[error("seed elements f^q are linearly dependent at level {0}")]
    DependentSeed(usize),
    #[error("element is not a sigma-eigenvector for e_rho")]
    NotInKernel,
    #[error("element exceeds level {0}")]
    LevelExceeded(usize),
    #[error("requested {requested} items exceeds budget {budget}")]
    BudgetExceeded { requested: u128, budget: u128 },
    #[error("no n-th root of {0} for the branch at this puncture")]
    NoBranchRoot(String),
    #[error("expansion precision too small for a pole term")]
    InsufficientPrecision,
    #[error("no cover realizes profile {0}")]
    NoProfile(String),
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
