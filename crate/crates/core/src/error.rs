use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An input violates a structural precondition (not a GHZ state, no qualified nodes, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    /// Lattice dimensions incompatible with the requested construction.
    #[error("size constraint: {0}")]
    Size(String),
    /// A network document could not be decoded or failed validation.
    #[error("parse error at {position}: {message}")]
    Parse { position: String, message: String },
    /// A Monte Carlo estimator could not produce a value.
    #[error("estimation failed: {0}")]
    Estimation(String),
    /// Cluster enumeration exceeded its configured bounds.
    #[error("enumeration: {0}")]
    Enumeration(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(position: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            position: position.into(),
            message: message.into(),
        }
    }
}
