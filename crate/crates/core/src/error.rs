use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A constructed value would break one of its invariants.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// A configuration file could not be parsed.
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    /// The optimizer could not satisfy the requested constraints.
    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invariant(msg: impl Into<String>) -> Error {
    Error::Invariant(msg.into())
}
