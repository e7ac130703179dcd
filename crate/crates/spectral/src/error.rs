use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("CFL violation: dt = {dt} exceeds limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("non-finite value detected at t = {t}: {context}")]
    NaN { t: f64, context: String },
    #[error("smallness violated: 4 |N| |a| = {estimate} >= 1")]
    SmallnessViolated { estimate: f64 },
    #[error("no convergence: {0}")]
    NoConverge(String),
    #[error("iteration diverging: ratio > 1 for three consecutive iterates ending at k = {k}")]
    Divergence { k: usize },
    #[error("trajectory needs {bytes} bytes, above the {cap} byte budget")]
    MemoryBudget { bytes: usize, cap: usize },
    #[error("background parameters not admissible: {0}")]
    NotInM(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] homns_core::Error),
}

pub type SimResult<T> = std::result::Result<T, SimError>;
