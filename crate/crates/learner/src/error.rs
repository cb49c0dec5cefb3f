use std::path::PathBuf;

use thiserror::Error;

use crate::train::History;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("input has {found} values, model expects {expected}")]
    Shape { expected: usize, found: usize },

    #[error("training diverged in epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize, history: Box<History> },

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] gestalt_core::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) | Error::Shape { .. } => "invalid-input",
            Error::Diverged { .. } => "divergence",
            Error::Checkpoint(_) | Error::Csv(_) => "format",
            Error::Io { .. } => "io",
            Error::Core(e) => e.category(),
        }
    }
}
