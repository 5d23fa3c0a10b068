use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Gram matrix is ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("data norm certificate {norm_sq:.6e} exceeds budget R^2 = {budget:.6e}")]
    NormBudgetExceeded { norm_sq: f64, budget: f64 },

    #[error("rejection sampling failed after {attempts} attempts (try sampling.mode = rescale)")]
    RejectionBudgetExhausted { attempts: usize },

    #[error("grid of {requested} points exceeds the cap of {cap}")]
    SizeOverflow { requested: u128, cap: usize },

    #[error("target point is degenerate: posterior std {sigma:.3e} <= 1e-8")]
    TargetDegenerate { sigma: f64 },

    #[error("policy violation: {0}")]
    PolicyViolation(String),

    #[error("eps = {eps} is outside the valid regime (requires eps < {limit})")]
    OutOfRegime { eps: f64, limit: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
