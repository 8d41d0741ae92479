use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CasimirError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical singularity: {0}")]
    Singularity(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("singular factorization: {0}")]
    SingularFactorization(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CasimirError {
    /// Coarse category, used by front ends to map errors onto exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            CasimirError::Domain(_) | CasimirError::DegenerateGeometry(_) => ErrorCategory::Domain,
            CasimirError::Singularity(_)
            | CasimirError::NonConvergence(_)
            | CasimirError::SingularFactorization(_)
            | CasimirError::Overflow(_) => ErrorCategory::Numerical,
            CasimirError::IllConditioned(_) => ErrorCategory::Fit,
            CasimirError::InvalidInput(_) => ErrorCategory::Input,
            CasimirError::Io(_) => ErrorCategory::Io,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Input,
    Domain,
    Numerical,
    Fit,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Input => 2,
            ErrorCategory::Domain => 3,
            ErrorCategory::Numerical => 4,
            ErrorCategory::Fit => 5,
            ErrorCategory::Io => 6,
        }
    }
}

impl From<std::io::Error> for CasimirError {
    fn from(e: std::io::Error) -> Self {
        CasimirError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CasimirError>;
