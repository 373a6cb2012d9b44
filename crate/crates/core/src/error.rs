//! Error types shared across the crate.

use thiserror::Error;

/// Shape of a matrix operand, used in error reporting.
pub type Shape = (usize, usize);

#[derive(Debug, Error)]
pub enum Error {
    /// Two operands had incompatible shapes. Both shapes are named so the
    /// failing call site is identifiable from the message alone.
    #[error("shape mismatch in `{op}`: left is {}x{}, right is {}x{}", left.0, left.1, right.0, right.1)]
    ShapeMismatch {
        op: &'static str,
        left: Shape,
        right: Shape,
    },

    /// Invalid configuration (bad widths, fractions, schedule bounds, ...).
    #[error("config error: {0}")]
    Config(String),

    /// Invalid data fed to an operation (labels out of range, length
    /// mismatches between features and labels, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A dataset file could not be ingested. `offset` is the byte position
    /// at which parsing failed.
    #[error("ingestion error in {path} at byte {offset}: {reason}")]
    Ingestion {
        path: String,
        offset: u64,
        reason: String,
    },

    /// Malformed or unreadable checkpoint.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// Non-finite values encountered where finite math is required.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An operation was called in a state it does not support
    /// (e.g. querying an empty activation ledger).
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(op: &'static str, left: Shape, right: Shape) -> Self {
        Error::ShapeMismatch { op, left, right }
    }
}
