use thiserror::Error;

/// Errors produced by the simulation kernels.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A caller-supplied value violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An adaptive routine ran out of its evaluation budget. The best
    /// estimate reached so far is carried along with its error estimate.
    #[error("evaluation budget of {budget} exceeded (best estimate {estimate}, error {estimated_error})")]
    BudgetExceeded {
        budget: usize,
        estimate: f64,
        estimated_error: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
