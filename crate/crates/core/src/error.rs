//! Crate-wide error type.

use std::path::PathBuf;

/// Errors surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violates a documented precondition (wrong length,
    /// out-of-range value, NaN/Inf input, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An input breaks a structural contract (e.g. a matrix passed as
    /// Hermitian is not Hermitian within tolerance).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The channel realization carries no usable energy, so beams or
    /// detection statistics are undefined.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    /// Filesystem failure, annotated with the offending path.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateChannel(msg.into())
    }
}
