use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameters outside the admissible set J: {0}")]
    OutsideJ(String),
    #[error("solution blows up near y = {y}")]
    BlowUp { y: f64 },
    #[error("no convergence: {0}")]
    NoConverge(String),
    #[error("point lies on the symmetry axis")]
    OnAxis,
    #[error("finite-difference step {h} too large for axis distance {rho}")]
    StepTooLarge { h: f64, rho: f64 },
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("integral diverges: endpoint values ({minus}, {plus}) are nonzero")]
    Diverging { minus: f64, plus: f64 },
    #[error("inequality conditions fail: {0}")]
    ConditionsFail(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
