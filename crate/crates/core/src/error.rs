use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("invalid ring spec: {0}")]
    InvalidSpec(String),
    #[error("two-level reduction invalid: gap ratio {measured:.3e} below required {required:.3e}")]
    ReductionInvalid { measured: f64, required: f64 },
    #[error("malformed document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
