use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("truncation level mismatch: {left} vs {right}")]
    LevelMismatch { left: usize, right: usize },

    #[error("scalar part must be exactly 1 for a group element, found {0}")]
    NotUnital(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("time grid must be strictly increasing (index {0})")]
    NonIncreasingTimes(usize),

    #[error("path needs at least {needed} samples, found {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("interval [{0}, {1}] is not spanned by grid points")]
    OffGrid(f64, f64),

    #[error("derivative of order {requested} requested but only {available} available")]
    OrderTooHigh { requested: usize, available: usize },

    #[error("regularity condition violated: {0}")]
    Regularity(String),

    #[error("input is not dominated: {0}")]
    NotDominated(String),

    #[error("Picard iteration did not converge after {iterations} iterations (last delta {last_delta:e}){hint}")]
    NoConvergence {
        iterations: usize,
        last_delta: f64,
        hint: String,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
