use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge after {refinements} step halvings (last relative change {change:e})")]
    Quadrature { refinements: usize, change: f64 },

    #[error("aggregate radar energy is zero; cannot scale couplings to the requested SIR")]
    ZeroRadarEnergy,

    #[error("approximation window is empty: T' - tau_min = {0} chips")]
    EmptyWindow(f64),

    #[error("delay grid needs {needed} matrix entries, cap is {cap}")]
    GridTooLarge { needed: usize, cap: usize },

    #[error("solver diverged: {0}")]
    Divergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
