use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator, the grid runner and the analysis stage.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is outside its domain or inconsistent with others.
    #[error("configuration error: {0}")]
    Config(String),

    /// A function was called with arguments outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An internal consistency check failed. Indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),

    /// A text file (config, landscape, dataset) could not be parsed.
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
