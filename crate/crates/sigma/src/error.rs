use std::path::PathBuf;

/// Errors surfaced by ingestion, configuration, and the alignment pipeline.
#[derive(Debug, thiserror::Error)]
pub enum SigmaError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("entity {0:?} or its partner is already matched")]
    AlreadyMatched(String),

    #[error("instance too large for exhaustive search: {0} entities (limit {1})")]
    TooLarge(usize, usize),

    #[error("knowledge base is empty")]
    EmptyKb,

    #[error("no ground truth pairs")]
    NoGroundTruth,
}

pub type Result<T> = std::result::Result<T, SigmaError>;
