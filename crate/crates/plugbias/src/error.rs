use thiserror::Error;

/// Errors reported by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    /// A quantity needed by the computation was not supplied or is not
    /// defined for this functional. Never replaced by zero.
    #[error("unavailable: {0}")]
    Unavailable(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn unavailable<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Unavailable(msg.into()))
}

pub(crate) fn degenerate<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Degenerate(msg.into()))
}
