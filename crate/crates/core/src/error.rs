use thiserror::Error;

/// Errors produced by the norm engines and their input validation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    /// Input violates a documented precondition or type invariant.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A configured search or oracle cap was exceeded.
    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    /// A witness failed to re-evaluate to the value it was reported with.
    #[error("witness rejected: {0}")]
    Witness(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn cap(msg: impl Into<String>) -> Self {
        Error::CapExceeded(msg.into())
    }

    pub(crate) fn witness(msg: impl Into<String>) -> Self {
        Error::Witness(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
