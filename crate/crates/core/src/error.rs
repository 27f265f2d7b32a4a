use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("node {node} out of range (n = {n})")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("edge {edge} out of range (m = {m})")]
    UnknownEdge { edge: usize, m: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("graph has {m} edges; exact enumeration is limited to {limit}")]
    TooManyEdges { m: usize, limit: usize },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{0}: no edges left after filtering")]
    EmptyGraph(PathBuf),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

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

    /// True for errors that stem from user input (configs, flags, files)
    /// rather than failures during a run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Parameter(_)
                | Error::Parse { .. }
                | Error::EmptyGraph(_)
                | Error::NodeOutOfRange { .. }
        )
    }
}
