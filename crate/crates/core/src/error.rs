use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown shape preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid shape parameter `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },

    #[error("shape is not star-shaped: {0}")]
    NotStarShaped(String),

    #[error("grid needs at least {min} nodes, got {got}")]
    GridTooSmall { min: usize, got: usize },

    #[error("unsupported dimension n = {0} (only 1 and 2)")]
    UnsupportedDimension(usize),

    #[error("degenerate shape: {0}")]
    DegenerateShape(String),

    #[error("kernel evaluated at or after its center time (tau = {tau})")]
    NonPositiveTau { tau: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid flow configuration: {0}")]
    InvalidFlowConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

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
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
