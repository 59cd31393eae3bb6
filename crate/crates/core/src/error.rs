//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid observer: {0}")]
    InvalidObserver(String),

    #[error("CFL violation: dt*max|u|*N/L = {cfl:.3} exceeds 1.0 at t = {time:.6}")]
    CflViolation { cfl: f64, time: f64 },

    #[error("integration failure (non-finite state) at t = {time:.6}")]
    IntegrationFailure { time: f64 },

    #[error("states are at different times: {0} vs {1}")]
    TimeMismatch(f64, f64),

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("zero field in ensemble (index {0})")]
    ZeroField(usize),

    #[error("decay-rate fit needs at least {needed} samples in window, found {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("decay-rate fit window contains non-positive errors")]
    NonPositiveErrors,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
