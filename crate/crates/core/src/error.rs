use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the context-generation and scoring pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid dataset: {0}")]
    Validation(String),

    #[error("commit lookup failed for {commit}: {message}")]
    Lookup { commit: String, message: String },

    #[error("git failed: {0}")]
    Git(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("training refused: {0}")]
    Training(String),

    #[error("remote scorer timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },

    #[error("remote scorer transport error: {0}")]
    Transport(String),

    #[error("remote scorer protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
