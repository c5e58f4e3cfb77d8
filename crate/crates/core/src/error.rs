use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeError {
    #[error("antiderivative in z of a z-constant term is not periodic ({0})")]
    NonPeriodicAntiderivative(String),
    #[error("field is not even in z")]
    ParityViolation,
    #[error("field has the wrong role: {0}")]
    RoleViolation(String),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("shape violation: {0}")]
    ShapeViolation(String),
    #[error("time step became unstable at t = {t} (norm {norm:e})")]
    StepUnstable { t: f64, norm: f64 },
    #[error("error budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("target not in synthesizable span (residual {residual:e})")]
    NotInSpan { residual: f64 },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, PeError>;
