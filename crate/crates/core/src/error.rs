//! Crate-wide error type.
//!
//! Every fallible operation in the library reports through [`Error`] so that
//! the CLI and the C ABI can map failures onto stable exit/status codes.
//! Numerical guards (non-finite data, violated preconditions such as a
//! non-transverse vector potential) are ordinary errors here, not panics:
//! they are expected outcomes when a caller feeds inconsistent fields in.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Grid construction rejected the requested shape.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Two fields that must live on the same grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A field contains NaN or infinity; the message identifies the first
    /// offending node so the caller can trace the producer.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// An operation precondition on the field data failed (e.g. a vector
    /// potential handed to a routine that requires transversality).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A scenario or configuration parameter is out of range or unknown.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// File format violation while reading serialized fields.
    #[error("format error: {0}")]
    Format(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error indicates bad input data (as opposed to an
    /// environment/I-O problem). Used by the CLI to pick exit codes.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
