use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    Rejected(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// An expectation value came back with a non-negligible imaginary part,
    /// which means the operator handed in was not Hermitian.
    #[error("expectation has imaginary part {0:e}; operator is not Hermitian")]
    NonHermitianExpectation(f64),

    #[error("malformed input at line {line}, column {column}: {message}")]
    Format {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("entry {entry}: {message}")]
    Invariant { entry: usize, message: String },

    #[error("no settings")]
    NoSettings,

    #[error("missing setting {0}")]
    MissingSetting(String),

    #[error("duplicate setting {0}")]
    DuplicateSetting(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn rejected(msg: impl Into<String>) -> Self {
        Error::Rejected(msg.into())
    }

    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        Error::Format {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
