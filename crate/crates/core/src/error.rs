use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at dimension {dim}")]
    NonFinite { dim: usize },

    #[error("variance {value:e} at dimension {dim} is below the round-off slack")]
    NegativeVariance { dim: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("line {line}: {reason}")]
    Record { line: usize, reason: String },

    #[error("not enough records: need {needed}, found {found}")]
    NotEnoughRecords { needed: usize, found: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
