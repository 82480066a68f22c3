use thiserror::Error;

use crate::engine::StageRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed edge-list or configuration text. `line` is 1-based; 0 when
    /// the input has no line structure.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("layer index {layer} out of range for a multiplex with {layers} layer(s)")]
    LayerOutOfRange { layer: usize, layers: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("measure undefined: {0}")]
    UndefinedMeasure(String),

    /// Iteration caps exhausted. The trace holds every completed stage.
    #[error("no convergence after {halvings} halving(s): {reason}")]
    NonConvergence {
        halvings: usize,
        reason: String,
        trace: Vec<StageRecord>,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }
}
