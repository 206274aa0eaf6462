use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("lattice mismatch: N={left} vs N={right}")]
    LatticeMismatch { left: usize, right: usize },
    #[error("block index {j} exceeds jMax={j_max}")]
    BlockOutOfRange { j: i32, j_max: i32 },
    #[error("nonzero mean mode")]
    NonzeroMean,
    #[error("budget exceeded: {needed} pairs > cap {cap}")]
    BudgetExceeded { needed: u64, cap: u64 },
    #[error("quadrature did not reach tolerance: estimate {estimate:e} > {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },
    #[error("no contraction after {iterations} Picard iterations (last increment {last:e})")]
    NoContraction { iterations: usize, last: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("config: {0}")]
    Config(String),
    #[error("format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
