use thiserror::Error;

/// Errors produced by evaluation, transforms and the solver.
#[derive(Debug, Error)]
pub enum Error {
    /// A point or argument left the domain where an operation is defined.
    /// The message names the violated constraint.
    #[error("domain violation: {0}")]
    Domain(String),

    /// Mismatched dimensions or unsupported jet order.
    #[error("invalid argument: {0}")]
    Invalid(String),

    /// The iteration produced a non-finite quantity and was aborted.
    #[error("solver aborted: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
