use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed line: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty input file {0}")]
    EmptyFile(PathBuf),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("alignment references unknown item key `{0}`")]
    UnknownItemKey(String),

    #[error("duplicate alignment for item key `{0}`")]
    DuplicateAlignment(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("negative sampling exhausted retries for batch")]
    NegativeSamplingExhausted,

    #[error("non-finite gradient in table `{0}`")]
    NonFiniteGradient(&'static str),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Diverged { epoch: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
