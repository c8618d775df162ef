//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GplError {
    /// Text input could not be parsed; `line` is 1-based.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A ranking violates a structural invariant (bucket indices, truncation,
    /// duplicate entities).
    #[error("invalid ranking: {0}")]
    InvalidRanking(String),

    /// A label does not name any entity in the dataset.
    #[error("unknown entity '{0}'")]
    UnknownEntity(String),

    /// A parameter vector does not match the number of entities.
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A numeric argument is outside its legal range (theta, prior shapes,
    /// iteration counts, bell input, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The data cannot be used with the requested operation, e.g. reversing
    /// truncated rankings or running the paired sampler on longer rankings.
    #[error("{0}")]
    IncompatibleData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GplError>;
