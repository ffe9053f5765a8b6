use thiserror::Error;

/// Errors raised by the critical-set toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input shapes or sizes do not agree.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A point does not lie in the domain of the requested operator.
    #[error("domain error: {0}")]
    Domain(String),
    /// A construction needs something that is not available (empty zero set,
    /// unsatisfied hypothesis, ...).
    #[error("not applicable: {0}")]
    NotApplicable(String),
    /// A numerical routine failed to reach its stated tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
