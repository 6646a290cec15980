use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = HarvestError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarvestError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    /// A caller broke an operation's precondition (querying a non-border node,
    /// mismatched feature dimension, bad arm index, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("border set is empty; no node can be queried")]
    ExhaustedBorder,

    #[error("target mass {x} is not achievable; feasible range is [{lo}, {hi}]")]
    Infeasible { x: f64, lo: f64, hi: f64 },

    #[error("regret undefined: every classifier set found zero targets on dataset `{0}`")]
    UndefinedRegret(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarvestError {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        HarvestError::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
