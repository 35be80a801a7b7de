use std::path::PathBuf;

use crate::scene::Component;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid label map: {0}")]
    InvalidMap(String),

    #[error("malformed {what}: {detail}")]
    Malformed { what: &'static str, detail: String },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },

    #[error("component {0} is absent from the map")]
    ComponentAbsent(Component),

    #[error("no piece window reaches the required coverage for {0}")]
    PieceCoverage(Component),

    #[error("content hash mismatch: manifest says {expected}, data hashes to {actual}")]
    ChecksumMismatch { expected: String, actual: String },

    #[error("dangling label-map reference `{0}`")]
    DanglingMapRef(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver `{solver}` failed on problem {problem_id}: {reason}")]
    SolverFailed {
        solver: String,
        problem_id: String,
        reason: String,
    },

    #[error("human reference: {0}")]
    HumanReference(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn malformed(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Malformed {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Error::Io { path, source }
    }
}
