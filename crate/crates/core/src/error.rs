use crate::linalg::LinalgError;

/// Crate-wide error type for the solver stack.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("state {state:?} outside the model domain box")]
    OutOfDomain { state: Vec<f64> },

    #[error("eigenvalues not strictly separated at {state:?}: gap {gap:.3e}")]
    NonHyperbolic { state: Vec<f64>, gap: f64 },

    #[error("wave curve left the domain box (family {family}, strength {strength})")]
    LeftDomain { family: usize, strength: f64 },

    #[error("{op}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        op: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("initial datum total variation {tv:.3} exceeds the validated regime (limit {limit})")]
    TvTooLarge { tv: f64, limit: f64 },

    #[error("total non-physical strength {total:.3e} exceeded the budget {budget:.3e} at t={time}")]
    BudgetExceeded { total: f64, budget: f64, time: f64 },

    #[error("front count exceeded the hard cap {cap}")]
    FrontCountExplosion { cap: usize },

    #[error("jump set does not match the run log: {reason}")]
    InconsistentJumpSet { reason: String },

    #[error("operation requires a jump set for family {family}, none supplied")]
    JumpSetMissing { family: usize },

    #[error("region boundary is not a characteristic of the log: {reason}")]
    BoundaryNotCharacteristic { reason: String },

    #[error("operation only defined for scalar systems (n=1), model has n={n}")]
    NotScalar { n: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Linalg(#[from] LinalgError),

    #[error("serialization: {0}")]
    Serialize(String),
}

pub type Result<T> = std::result::Result<T, Error>;
