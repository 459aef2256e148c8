use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter is outside the domain of the function it was passed to.
    #[error("domain error: {0}")]
    Domain(String),

    /// The lattice specification failed validation.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The steady-state equations do not have a unique solution.
    #[error("non-unique steady state: {0}")]
    NonUniqueSteadyState(String),

    #[error("steady-state residual {residual:e} exceeds tolerance {bound:e}")]
    ResidualTooLarge { residual: f64, bound: f64 },

    #[error("non-finite value during integration at t = {time}; reduce the step size")]
    NonFinite { time: f64 },

    #[error("invalid step: {0}")]
    InvalidStep(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("not a lattice edge: ({0}, {1})")]
    NotAnEdge(usize, usize),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
