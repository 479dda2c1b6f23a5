use thiserror::Error;

/// Errors raised by the trajectory engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CpgError {
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid output limits: {0}")]
    InvalidLimits(String),

    #[error("invalid oscillator parameters: {0}")]
    InvalidParams(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid integrator config: {0}")]
    InvalidIntegrator(String),

    #[error("component {component} lies on or outside the open output box ({detail})")]
    BoundaryViolation { component: usize, detail: String },

    #[error("numerical singularity: {0}")]
    NumericalSingularity(String),

    #[error("non-finite state at t = {t}: {snapshot}")]
    NonFiniteState { t: f64, snapshot: String },

    #[error("period {requested} s is too short; minimum admissible period is {min_period} s")]
    PeriodTooShort { requested: f64, min_period: f64 },

    #[error("unknown motion `{0}`")]
    UnknownMotion(String),

    #[error("motion `{0}` is infeasible for the configured output limits")]
    InfeasibleMotion(String),

    #[error("scenario: {0}")]
    Scenario(String),
}

pub type Result<T, E = CpgError> = std::result::Result<T, E>;
