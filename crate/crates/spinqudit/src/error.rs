use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("Zeeman dominance check failed (mixing {mixing:.3e} > {limit:.1e}); use full diagonalization")]
    NotZeemanDominant { mixing: f64, limit: f64 },
    #[error("step size underflow at t = {t:e} s (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("probability defect {0:.3e} exceeds 1e-6")]
    ProbabilityDefect(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
