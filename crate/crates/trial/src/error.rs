use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation the current phase does not allow, or a stale answer.
    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("no unseen {what} left in {set}")]
    SetExhausted { set: String, what: String },

    #[error("dataset {set} is missing under {root}")]
    MissingDataset { set: String, root: PathBuf },

    #[error("unknown session `{0}`")]
    UnknownSession(String),

    #[error("invalid request: {0}")]
    InvalidInput(String),

    /// An event log that does not replay.
    #[error("event log is inconsistent: {0}")]
    Replay(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Core(#[from] gestalt_core::Error),
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
            Error::Protocol(_) => "protocol",
            Error::SetExhausted { .. } => "set-exhausted",
            Error::MissingDataset { .. } => "missing-dataset",
            Error::UnknownSession(_) => "unknown-session",
            Error::InvalidInput(_) => "invalid-input",
            Error::Replay(_) | Error::Json(_) => "format",
            Error::Io { .. } => "io",
            Error::Core(e) => e.category(),
        }
    }
}
