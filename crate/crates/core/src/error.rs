//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by dataset operations, mechanisms, engines, and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated; the message names the offending values.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested operation is not defined for the given family or marginal.
    #[error("unsupported operation: {0}")]
    UnsupportedOperation(String),

    /// Derived parameters cannot be satisfied by the provided sample; the message
    /// reports the minimal feasible size.
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::UnsupportedOperation(msg.into())
    }

    pub fn infeasible(msg: impl Into<String>) -> Self {
        Error::InfeasibleParameters(msg.into())
    }
}
