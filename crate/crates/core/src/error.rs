use thiserror::Error;

/// Errors raised by the calibration game toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalError {
    #[error("grid needs at least 2 bins, got m = {0}")]
    GridTooSmall(usize),
    #[error("value {0} lies outside [0, 1]")]
    OutOfUnitInterval(f64),
    #[error("bin index {index} out of range for m = {m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("transcript is empty")]
    EmptyTranscript,
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("invalid interval action ({lo}, {hi})")]
    InvalidInterval { lo: usize, hi: usize },
    #[error("direction q must be finite and not all zero")]
    DegenerateDirection,
    #[error("direction q has {got} coordinates, grid has m = {m}")]
    DimensionMismatch { got: usize, m: usize },
    #[error("support sets must be nonempty")]
    EmptySupport,
    #[error("horizon T_k = {0} too small for log log(T_k / 2)")]
    HorizonTooSmall(u64),
    #[error("invalid weights: {0}")]
    InvalidDistribution(String),
    #[error("neither condition A nor condition B holds at round {0}")]
    NoConditionHolds(usize),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CalError {
    fn from(e: std::io::Error) -> Self {
        CalError::Io(e.to_string())
    }
}

impl From<csv::Error> for CalError {
    fn from(e: csv::Error) -> Self {
        CalError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CalError {
    fn from(e: serde_json::Error) -> Self {
        CalError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CalError>;
