use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("matrix is not Hermitian (max |A - A^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("probability {value:e} outside [0, 1] beyond tolerance at {context}")]
    ProbabilityOutOfRange { value: f64, context: &'static str },

    /// A sampled outcome is (numerically) impossible for one of the shifted
    /// replicas, so the finite-difference derivative is undefined.
    #[error("trajectory aborted at step {step}: outcome {outcome} has shifted-replica probability {prob:e}")]
    DegenerateReplica { step: usize, outcome: usize, prob: f64 },

    #[error("aborted {aborted} of {total} trajectories, above the {budget} budget")]
    AbortBudgetExceeded {
        aborted: usize,
        total: usize,
        budget: f64,
    },

    #[error("surviving branch count {count} exceeds cap {cap} at depth {depth}; lower n_seq, raise eps_prune, or use the Monte-Carlo estimator")]
    BranchCap { depth: usize, count: usize, cap: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
