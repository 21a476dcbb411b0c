use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inconsistent data: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    InconsistentData { residual: f64, tolerance: f64 },

    #[error("design infeasible: {reason}")]
    DesignInfeasible {
        reason: String,
        /// Eigenvalue of the group that blocks the design, when one is identifiable.
        eigenvalue: Option<f64>,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("time step {dt:.3e} too large for the explicit integrator; use dt <= {suggested:.3e}")]
    StepTooLarge { dt: f64, suggested: f64 },

    #[error("scenario validation failed:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
