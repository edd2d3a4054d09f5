use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FqwError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid step set: {0}")]
    InvalidStepSet(String),
    #[error("degenerate kernel: {0}")]
    Degenerate(String),
    #[error("kernel is reducible: {0}")]
    Reducible(String),
    #[error("no genus-0 case matches multiplicity pattern {0}")]
    NoGenusCase(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not ergodic: {0}")]
    NotErgodic(String),
    #[error("zero-drift boundary case, criterion inapplicable: {0}")]
    ZeroDrift(String),
    #[error("failed to converge: {0}")]
    NonConvergence(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl FqwError {
    /// Process exit code for the CLI: 3 for numerical failures, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            FqwError::NonConvergence(_) => 3,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FqwError::Parse(_) => "parse",
            FqwError::InvalidStepSet(_) => "invalid_step_set",
            FqwError::Degenerate(_) => "degenerate",
            FqwError::Reducible(_) => "reducible",
            FqwError::NoGenusCase(_) => "no_genus_case",
            FqwError::Domain(_) => "domain",
            FqwError::NotErgodic(_) => "not_ergodic",
            FqwError::ZeroDrift(_) => "zero_drift",
            FqwError::NonConvergence(_) => "non_convergence",
            FqwError::InsufficientData(_) => "insufficient_data",
        }
    }
}

pub type Result<T> = std::result::Result<T, FqwError>;
