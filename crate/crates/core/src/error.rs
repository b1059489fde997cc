use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("convergence condition violated: {0}")]
    Convergence(String),

    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),

    #[error("cost guard exceeded: {0} (set force, or pass --force, to run anyway)")]
    CostGuard(String),

    #[error("truncation deficit {deficit:.3e} exceeds {limit:.1e}; increase the cutoff")]
    Truncation { deficit: f64, limit: f64 },

    #[error(
        "routes disagree: quadrature {quadrature}, matrix {matrix} (|diff| {diff:.3e} > {tol:.1e})"
    )]
    Disagreement {
        quadrature: f64,
        matrix: f64,
        diff: f64,
        tol: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
