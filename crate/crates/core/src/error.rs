use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the optimizer and the experiment harness.
#[derive(Debug, Error)]
pub enum StaError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid rotation matrix: {0}")]
    InvalidMatrix(String),

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("translation endpoints coincide (distance {distance:e})")]
    DegenerateDirection { distance: f64 },

    #[error("cannot select from an empty batch")]
    EmptyBatch,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unknown benchmark function `{0}`")]
    UnknownFunction(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("traces have different lengths ({first} vs {other})")]
    TraceLengthMismatch { first: usize, other: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl StaError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        StaError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = StaError> = std::result::Result<T, E>;
