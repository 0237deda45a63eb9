use std::path::PathBuf;

use crate::model::{AgentId, PostId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("unknown post {0}")]
    UnknownPost(PostId),
    #[error("post {post} expired at bin {expired_after}, event at bin {time}")]
    ExpiredPost {
        post: PostId,
        time: u64,
        expired_after: u64,
    },
    #[error("ids must be assigned densely: expected {expected}, got {got}")]
    NonDenseId { expected: u32, got: u32 },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("event log is inconsistent: {0}")]
    InconsistentLog(String),
    #[error("matrix dimension {dim} exceeds the dense limit {limit}; raise the degree/strength filter")]
    TooLarge { dim: usize, limit: usize },
    #[error("node {0} has zero strength")]
    ZeroStrength(usize),
    #[error("iteration did not converge after {iterations} iterations (last change {last_step:e})")]
    NoConvergence { iterations: usize, last_step: f64 },
    #[error("fit refused: {0}")]
    FitRefused(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
