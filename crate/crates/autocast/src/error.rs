//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed row at line {line}: {msg}")]
    MalformedRow { line: usize, msg: String },

    #[error("duplicate (item, timestamp) pair: item `{item}` at {timestamp}")]
    DuplicateTimestamp { item: String, timestamp: String },

    #[error("mixed frequencies: {0}")]
    MixedFrequency(String),

    #[error("item `{item}` too short: length {len}, need at least {need}")]
    ItemTooShort {
        item: String,
        len: usize,
        need: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("actual value is zero at index {0}: MAPE is undefined")]
    ZeroActual(usize),

    #[error("zero variance in `{0}`")]
    ZeroVariance(String),

    #[error("singular regression{} - try a lower model order", if .0.is_empty() { String::new() } else { format!(" ({})", .0) })]
    SingularRegression(String),

    #[error("missing forecast for algorithm `{algo}`, item `{item}`")]
    MissingForecast { algo: String, item: String },

    #[error("no successful trial")]
    NoSuccessfulTrial,

    #[error("covariance matrix not positive definite after jitter escalation")]
    NotPositiveDefinite,

    #[error("schema mismatch: expected columns {expected:?}, found {found:?}")]
    SchemaMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("stage `{stage}` failed: {msg}")]
    StageFailed { stage: String, msg: String },

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
