use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid controls: {0}")]
    InvalidControls(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("CFL condition violated: dt * max|v| = {shift:.3e} exceeds dx = {dx:.3e}")]
    Cfl { shift: f64, dx: f64 },
    #[error("mismatch: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
