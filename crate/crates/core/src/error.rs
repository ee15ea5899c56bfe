use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("unknown preset `{0}` (expected `simple` or `complex`)")]
    UnknownPreset(String),

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("episode already terminated with status {0:?}")]
    EpisodeTerminated(crate::environment::Status),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("no path found: {0}")]
    NoPath(String),

    #[error("malformed trace at line {line}: {reason}")]
    MalformedTrace { line: usize, reason: String },

    #[error("{path}: {source}")]
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
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
