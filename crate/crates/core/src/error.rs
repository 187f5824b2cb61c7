use thiserror::Error;

/// Errors produced by the hands-off control library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HandsoffError {
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// The initial state has no feasible control at the given horizon.
    #[error("initial state not reachable at horizon T = {horizon}")]
    NotReachable { horizon: f64 },

    #[error("initial state outside the non-normal region: {0}")]
    RegionViolation(String),

    #[error("pulse does not fit in the horizon: {0}")]
    Geometry(String),

    #[error("pair (A, B) is not controllable (Kalman rank {rank} < {n})")]
    Uncontrollable { rank: usize, n: usize },

    /// The candidate control does not steer the state to the origin.
    #[error("candidate control is infeasible: {0}")]
    InfeasibleCandidate(String),

    #[error("linear program failed: {0}")]
    Lp(String),
}

pub type Result<T> = std::result::Result<T, HandsoffError>;
