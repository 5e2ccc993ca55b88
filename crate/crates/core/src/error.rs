use thiserror::Error;

/// Errors produced by estimation, sampling and numerical routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A fit is ill-posed on the given data (singular normal equations,
    /// tied order statistics, empty grids).
    #[error("degenerate fit: {0}")]
    Degenerate(String),

    /// A numerical routine failed to converge or produced a non-finite
    /// result; the message reports the offending quantity and bracket.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed or unusable input data.
    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
