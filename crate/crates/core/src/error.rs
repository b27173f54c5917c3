use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Green function is singular at k = {k} (|k - sigma| = {distance:e})")]
    SingularGreenFunction { k: f64, distance: f64 },

    #[error("series order {order} exceeds the configured maximum {max}")]
    OrderOverflow { order: usize, max: usize },

    #[error("series did not converge after {orders} orders (last relative shell {last_shell:e}, cancellation ratio {cancellation:e})")]
    SeriesDiverged {
        orders: usize,
        last_shell: f64,
        cancellation: f64,
    },

    #[error("adaptive quadrature did not reach tolerance (estimate {error_estimate:e} after {intervals} intervals)")]
    QuadratureNotConverged {
        error_estimate: f64,
        intervals: usize,
    },

    #[error("momentum grid too coarse: need {required} points, limit is {limit}")]
    GridTooCoarse { required: usize, limit: usize },

    #[error("g2 is undefined: {0}")]
    UndefinedG2(&'static str),

    #[error("steady state is not unique (pivot ratio {pivot_ratio:e})")]
    DegenerateSteadyState { pivot_ratio: f64 },

    #[error("Fock cutoff {cutoff} too small: top-level population {population:e}")]
    CutoffTooSmall { cutoff: usize, population: f64 },

    #[error("time integration did not converge (residual {residual:e} at t = {time})")]
    NotConverged { residual: f64, time: f64 },

    #[error("eigensolver failed: {0}")]
    EigenSolverFailure(String),
}

impl Error {
    /// Short machine-readable tag, used as the flag column of sweep output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::SingularGreenFunction { .. } => "singular_green_function",
            Error::OrderOverflow { .. } => "order_overflow",
            Error::SeriesDiverged { .. } => "series_diverged",
            Error::QuadratureNotConverged { .. } => "quadrature_not_converged",
            Error::GridTooCoarse { .. } => "grid_too_coarse",
            Error::UndefinedG2(_) => "undefined_g2",
            Error::DegenerateSteadyState { .. } => "degenerate_steady_state",
            Error::CutoffTooSmall { .. } => "cutoff_too_small",
            Error::NotConverged { .. } => "not_converged",
            Error::EigenSolverFailure(_) => "eigensolver_failure",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
