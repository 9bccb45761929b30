use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid split plane {0}")]
    InvalidPlane(String),

    #[error("point lies outside the stratum")]
    PointOutside,

    #[error("dimension {n} outside the supported range 1..={max}")]
    DimensionOutOfRange { n: usize, max: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("allocation condition violated: {0}")]
    ConditionViolated(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("budget of {n_max} evaluations is smaller than the initial batch of {n_init}")]
    BudgetTooSmall { n_max: u64, n_init: u64 },

    #[error("stratum {0} holds no samples")]
    EmptyStratum(u64),

    #[error("model evaluation failed: {0}")]
    Model(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
