use thiserror::Error;

use crate::solver::SolveStatus;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("uncertainty set is unbounded")]
    UnboundedSet,
    #[error("uncertainty set is not polyhedral")]
    NotPolyhedral,
    #[error("vertex enumeration exceeded the budget of {0} vertices")]
    VertexBudgetExceeded(usize),
    #[error("criterion is degenerate: {0}")]
    DegenerateCriterion(String),
    #[error("boundary tracing requires a two-dimensional stress space, got {0}")]
    TraceRequires2D(usize),
    #[error("{method} is not supported for {set} sets")]
    UnsupportedMethod { method: String, set: String },
    #[error("solver returned {status:?}: {context}")]
    Solver { status: SolveStatus, context: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
