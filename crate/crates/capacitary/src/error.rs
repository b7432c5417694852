use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} is not supported (expected 1, 2 or 3)")]
    InvalidDimension(usize),

    #[error("leaf budget exceeded: {needed} leaves requested, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("region lies outside the root cube")]
    OutsideRoot,

    #[error("degenerate region: {0}")]
    Degenerate(String),

    #[error("negative value {value} at leaf {leaf}")]
    NegativeValue { leaf: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance too large for exhaustive enumeration: {0}")]
    InfeasibleSize(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("unknown check id `{0}`")]
    UnknownCheck(String),

    #[error("parse error: {0}")]
    Parse(String),

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
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
