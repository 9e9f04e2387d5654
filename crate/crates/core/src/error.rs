use thiserror::Error;

/// Errors shared by all kernels, cones, solvers and optimizers.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the inputs was violated (shape mismatch,
    /// non-finite entries, indefinite matrix where PSD is required, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The operation is well defined mathematically but deliberately not
    /// implemented for these arguments.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The numeric oracle could not find a strictly feasible starting point.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An iterative solver hit its iteration cap. `residual` is the last
    /// stationarity measure; the best iterate is reported in the message.
    #[error("not converged after {iters} iterations (residual {residual:.3e})")]
    NotConverged { iters: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
