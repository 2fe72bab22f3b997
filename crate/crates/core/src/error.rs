use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("multidegree mismatch: expected {expected:?}, found {found:?}")]
    MultidegreeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0} must be nonzero")]
    ZeroInput(&'static str),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("inconsistent linear system: {0}")]
    Inconsistent(String),

    #[error("internal identity check failed: {0}")]
    IdentityCheck(String),

    #[error("malformed input at `{field}`: {message}")]
    Parse { field: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
