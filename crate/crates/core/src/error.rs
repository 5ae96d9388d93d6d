use thiserror::Error;

pub type Result<T, E = ConeError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConeError {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("invalid algebra shape {0:?}: block sizes must be non-empty and positive")]
    InvalidShape(Vec<usize>),

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("singular element: {0}")]
    SingularError(String),

    #[error("unsupported element: {0}")]
    UnsupportedElement(String),

    #[error("order witness not found: {0}")]
    WitnessNotFound(String),

    #[error("numerical health failure: {0}")]
    NumericalHealthFailure(String),

    #[error("invalid Jordan isomorphism: {0}")]
    InvalidJordan(String),

    #[error("parse error: {0}")]
    Parse(String),
}
