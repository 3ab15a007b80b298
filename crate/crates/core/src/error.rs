//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data. `line` is 1-based within the source file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A source file with no document lines.
    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    /// Structurally valid input that violates a contract (shape mismatch,
    /// non-finite value, out-of-range argument).
    #[error("validation error: {0}")]
    Validation(String),

    /// A configuration that cannot be run as requested.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
