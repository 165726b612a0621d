use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("null state")]
    NullState,
    #[error("dimension mismatch: expected {expected} amplitudes, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state not normalized: norm {0}")]
    NotNormalized(f64),
    #[error("not unitary")]
    NotUnitary,
    #[error("system index {index} out of range for {sites} systems")]
    SystemOutOfRange { index: usize, sites: usize },
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("zero-probability branch")]
    ZeroProbabilityBranch,
    #[error("invalid density operator: {0}")]
    InvalidDensity(String),
    #[error("outcome not in context: {0}")]
    OutcomeNotInContext(String),
    #[error("broken chain")]
    BrokenChain,
    #[error("invalid inference link: {0}")]
    InvalidLink(String),
    #[error("empty conditional")]
    EmptyConditional,
    #[error("unreached outcome")]
    UnreachedOutcome,
    #[error("no agents")]
    NoAgents,
    #[error("inconsistent record basis: {0}")]
    InconsistentBasis(String),
    #[error("flag requires erasure")]
    FlagRequiresErasure,
    #[error("nesting too deep: {0}")]
    NestingTooDeep(String),
    #[error("unknown label: {0}")]
    UnknownLabel(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
