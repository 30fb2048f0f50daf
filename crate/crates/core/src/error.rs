use thiserror::Error;

/// Errors raised by the wave, eigenvalue and oracle solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("value {value} outside the admissible domain {domain}")]
    Domain { value: f64, domain: &'static str },
    #[error("shooting failed: {0}")]
    Shooting(String),
    #[error("integration failed at {at}: {reason}")]
    Integration { at: f64, reason: String },
    #[error("({epsilon}, {k}) lies outside the frequency regime")]
    Regime { epsilon: f64, k: f64 },
    #[error("complex characteristic rates: discriminant {0} < 0")]
    ComplexRates(f64),
    #[error("series launch truncated: {0}")]
    Truncation(String),
    #[error("fate classification inconclusive at zeta = {0}")]
    Inconclusive(f64),
    #[error("no sign change found: {0}")]
    RootNotFound(String),
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),
    #[error("{0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
