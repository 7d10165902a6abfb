use thiserror::Error;

/// Errors raised by evaluators, guards and configuration handling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("theta series did not converge: {0}")]
    Convergence(String),
    #[error("singular configuration: {0}")]
    Singularity(String),
    #[error("size guard: {0}")]
    Size(String),
    #[error("closed-form prefactor needs even N, got N = {0}")]
    OddSize(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
}

impl Error {
    /// Short machine-readable tag, used as route status in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Convergence(_) => "ConvergenceError",
            Error::Singularity(_) => "SingularityError",
            Error::Size(_) => "SizeError",
            Error::OddSize(_) => "OddSizeError",
            Error::Parse(_) => "ParseError",
            Error::Validation(_) => "ValidationError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
