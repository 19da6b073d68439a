use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("size mismatch: expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("grid mismatch: {left} vs {right} modes per axis")]
    GridMismatch { left: usize, right: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient padding: {0}")]
    Padding(String),

    #[error("CFL violation at t = {t}: dt = {dt} exceeds limit {limit}")]
    CflViolation { t: f64, dt: f64, limit: f64 },

    #[error("blow-up at t = {t}: non-finite state")]
    BlowUp { t: f64 },

    #[error("unresolved scale: {0}")]
    Unresolved(String),

    #[error("support violation: {0}")]
    Support(String),

    #[error("checkpoint format: {0}")]
    Checkpoint(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
