use thiserror::Error;

/// Errors surfaced by the library. Protocol aborts are verdicts, not errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error("malformed input at {location}: {message}")]
    Format { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
