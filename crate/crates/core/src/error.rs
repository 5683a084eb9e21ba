use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One row of a refinement trace: the resolution parameter (cutoff distance,
/// coefficient count, ...) and the functional value observed there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub grid: f64,
    pub value: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("state error: {0}")]
    State(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("boundary function is not integrable (|phi| quadrature diverges under refinement)")]
    NonIntegrable { trace: Vec<TracePoint> },
    #[error("quantile spec failed validation: {failures:?}")]
    Validation { failures: Vec<crate::quantile::ValidationFailure> },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("step budget of {budget} steps exceeded")]
    StepBudget { budget: u64 },
    #[error("curve is not simple: segments {first} and {second} cross")]
    NonSimple { first: usize, second: usize },
    #[error("degenerate zero-length segment at vertex {0}")]
    DegenerateSegment(usize),
    #[error("not available: {reason}")]
    NotAvailable { reason: String, trace: Vec<TracePoint> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
