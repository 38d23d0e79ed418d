use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "periodic embedding failed: negative spectral mass fraction {fraction:.3e} exceeds \
         {tolerance:.1e}; increase the padding factor (currently {padding})"
    )]
    Embedding {
        fraction: f64,
        tolerance: f64,
        padding: usize,
    },

    #[error("singular system: zero diagonal in cell {cell}")]
    SingularSystem { cell: usize },

    #[error("multigrid did not reach tolerance after {cycles} cycles (residual {residual:.3e})")]
    InnerDivergence { cycles: usize, residual: f64 },

    #[error("Picard iteration exceeded {iterations} iterations at time step {step}")]
    NonlinearFailure { step: usize, iterations: usize },

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("campaign aborted: {0}")]
    CampaignAbort(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
