use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 1")]
    InvalidDimension(usize),
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    /// True for errors caused by bad caller input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidDimension(_) | Error::InvalidLaw(_) | Error::InvalidInput(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
