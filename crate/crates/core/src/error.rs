use thiserror::Error;

/// Errors raised by the library. Numerical failures that a run can survive
/// (monitor violations, slow subproblems) are reported through traces and
/// outcome flags instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("contract violation at k={k}: {what}")]
    Contract { k: usize, what: String },

    #[error("subproblem failed at k={k}: {reason}")]
    Subproblem { k: usize, reason: String },

    #[error("integration diverged at t={t}: norm {norm:e}")]
    Diverged { t: f64, norm: f64 },

    #[error("parse error at line {line}, field `{field}`: {msg}")]
    Parse { line: usize, field: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
