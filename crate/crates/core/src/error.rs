use thiserror::Error;

use crate::jet::JetError;

/// Every failure the laboratory can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("{op}: jet order exhausted")]
    OrderExhausted { op: String },
    #[error("{0}")]
    Domain(String),
    #[error("degenerate metric at base point: {0}")]
    DegenerateMetric(String),
    #[error("signature mismatch: {0}")]
    Signature(String),
    #[error("invalid configuration field `{field}`: {msg}")]
    InvalidConfig { field: String, msg: String },
    #[error("{op} needs jet order {demand} but only {have} is configured")]
    InsufficientOrder { op: String, demand: usize, have: usize },
    #[error("{op} is undefined in dimension {n}: {reason}")]
    ExcludedDimension { op: String, n: usize, reason: String },
    #[error("unregistered operator `{0}`")]
    UnregisteredOperator(String),
    #[error("operator `{0}` has no conformal bi-degree")]
    NoBiDegree(String),
    #[error("chart is not Einstein: {0}")]
    NotEinstein(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
