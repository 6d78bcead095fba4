use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field has {found} values, grid expects {expected}")]
    Shape { expected: usize, found: usize },
    #[error("invalid curve specification: {0}")]
    InvalidCurve(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("image: {0}")]
    Image(String),
    #[error("config {path}:{line}: {message}")]
    Config {
        path: String,
        line: usize,
        message: String,
    },
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("simulation aborted at step {step}: {reason}")]
    Aborted { step: usize, reason: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
