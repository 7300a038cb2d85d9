use thiserror::Error;

/// Everything that can go wrong across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("path loss is singular at distance {0} m (the law is referenced to 1 m)")]
    SingularDistance(f64),

    #[error("shape mismatch: expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("evaluation failed: {message} (evaluations: {evals}, error estimate: {error_estimate:e})")]
    Evaluation {
        message: String,
        evals: usize,
        error_estimate: f64,
    },

    #[error("infeasible instance: minimum weight {min_weight} exceeds capacity {capacity}")]
    Infeasible { min_weight: f64, capacity: f64 },

    #[error("enumeration budget exceeded: {size} combinations > {budget}")]
    BudgetExceeded { size: f64, budget: f64 },

    #[error("missing strategy value: {0}")]
    MissingValue(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
