use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {requested} exceeds the configured cap {cap}")]
    ResourceLimit { requested: usize, cap: usize },

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("parity violation: n = {n}, 2J (or lambda) = {value}")]
    Parity { n: usize, value: i64 },

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("matrix function did not converge: {0}")]
    NonConvergence(String),

    #[error("operator leaks out of the block (residual {leakage:e} > {tol:e})")]
    Leakage { leakage: f64, tol: f64 },

    #[error("requested state does not exist: {0}")]
    BoundaryCase(String),

    #[error("invariant violated during integration: {0}")]
    InvariantBreach(String),

    #[error("target unattainable: best error {best_error:e} after {length} pulses")]
    Unattainable { best_error: f64, length: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
