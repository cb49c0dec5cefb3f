use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image dimensions {width}x{height} are invalid: {reason}")]
    InvalidDimensions {
        width: u32,
        height: u32,
        reason: &'static str,
    },

    #[error("shape does not fit inside the {width}x{height} canvas")]
    OutOfBounds { width: u32, height: u32 },

    #[error("placement failed after {attempts} attempts: {what}")]
    Placement { attempts: u32, what: String },

    #[error("generator gave up after {attempts} attempts: {what}")]
    Rejection { attempts: u32, what: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("image decode failed: {0}")]
    Decode(String),

    #[error("image encode failed: {0}")]
    Encode(String),

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("oracle cannot classify image: {0}")]
    Unclassifiable(String),

    #[error("face alignment failed: {0}")]
    Alignment(String),

    #[error("face fusion failed: {0}")]
    Fusion(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("manifest check failed: {0}")]
    Integrity(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

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

    /// Stable, machine-readable category used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidDimensions { .. } | Error::InvalidParameter(_) => "invalid-input",
            Error::OutOfBounds { .. } | Error::Placement { .. } | Error::Rejection { .. } => {
                "generation"
            }
            Error::Decode(_) | Error::Encode(_) | Error::Format { .. } | Error::Json(_) => {
                "format"
            }
            Error::Csv(_) => "format",
            Error::Unclassifiable(_) => "oracle",
            Error::Alignment(_) | Error::Fusion(_) => "face",
            Error::Evaluation(_) => "evaluation",
            Error::Unknown { .. } => "unknown-name",
            Error::Integrity(_) => "integrity",
            Error::Io { .. } => "io",
        }
    }
}
