use thiserror::Error;

/// Everything that can go wrong while building or analyzing a system.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("row {history} at time {time} sums to {sum:.17}, expected 1 within {tol:e}")]
    UnnormalizedRow {
        time: usize,
        history: usize,
        sum: f64,
        tol: f64,
    },

    #[error("negative or non-finite probability {value} in row {history} at time {time}")]
    BadProbability {
        time: usize,
        history: usize,
        value: f64,
    },

    #[error("unknown variable {0}")]
    UnknownVariable(String),

    #[error("variable groups must be disjoint")]
    OverlappingGroups,

    #[error("horizon mismatch: {0}")]
    HorizonMismatch(String),

    #[error("size cap exceeded: {0}")]
    CapExceeded(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("feedback link is not in independent additive-noise form")]
    NotAdditive,

    #[error("channel is not memoryless")]
    NotMemoryless,

    #[error("quantile {0} lies outside [0, 1]")]
    QuantileOutOfRange(f64),

    #[error("density table has empty support")]
    EmptySupport,

    #[error("message prior has length {got}, expected {expected}")]
    PriorLengthMismatch { got: usize, expected: usize },

    #[error("system specification invalid: {0}")]
    InvalidSystem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
