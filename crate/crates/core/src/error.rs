use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{qubits} qubits exceeds the dense cutoff of {cutoff}")]
    DimensionOverflow { qubits: usize, cutoff: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate spectrum: gap {gap:e} is below tolerance")]
    Degenerate { gap: f64 },

    #[error("ambiguous eigenvector pairing for level {level}: overlaps {first:.9} and {second:.9}")]
    AmbiguousPairing { level: usize, first: f64, second: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot normalize: every weight is zero")]
    ZeroWeights,

    #[error("infinite variance: term {index} has zero weight but nonzero value")]
    InfiniteVariance { index: usize },

    #[error("hypothesis violated at index {index}: {message}")]
    HypothesisViolated { index: usize, message: String },

    #[error("bound is vacuous: {0}")]
    VacuousBound(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
