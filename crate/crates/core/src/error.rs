use thiserror::Error;

/// Errors raised by the simulator, its diagnostics and the persistence layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("blow-up detected (non-finite state); last good time t = {last_good_time}")]
    BlowUp { last_good_time: f64 },
    #[error("singular banded factorization for mode {mode}")]
    Singular { mode: usize },
    #[error("invalid weight request: {0}")]
    Weight(String),
    #[error("invalid diagnostic request: {0}")]
    Diagnostic(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
