use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sparsity: K = {k} must satisfy 1 <= K <= {p}")]
    InvalidSparsity { k: usize, p: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),

    #[error("degenerate random draw: {0}")]
    DegenerateDraw(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("malformed data in {}: {msg}", .path.display())]
    MalformedData { path: PathBuf, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown preset `{0}` (run `robustcs presets` for the list)")]
    UnknownPreset(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidSparsity { .. } | Error::InvalidNoise(_) => 2,
            Error::MissingFile(_) => 3,
            Error::MalformedData { .. } | Error::DimensionMismatch(_) | Error::Empty(_) => 4,
            Error::UnknownPreset(_) => 5,
            Error::Io(_) | Error::Json(_) | Error::DegenerateDraw(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
