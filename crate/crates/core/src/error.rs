use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("radial grid must exclude the origin (x_lo = {x_lo})")]
    RadialOrigin { x_lo: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    /// A value left the open domain of a nonlinearity. `index` is the node
    /// (or unknown) where it happened, when there is one.
    #[error("domain violation in {what}: value {value} at {}", fmt_index(*.index))]
    DomainViolation {
        what: &'static str,
        index: Option<usize>,
        value: f64,
    },

    #[error("negative input at node {index}: {value}")]
    NegativeInput { index: usize, value: f64 },

    #[error("non-positive resolvent result at node {index}: {value}")]
    NonPositiveResult { index: usize, value: f64 },

    #[error("linear solver failure: {0}")]
    SolverFailure(String),

    #[error("newton did not converge in {iters} iterations (residual {residual:e})")]
    NewtonDivergence { iters: usize, residual: f64 },

    #[error("newton damping failed after {halvings} halvings")]
    DampingFailure { halvings: usize },

    #[error("time step rejected {failures} consecutive times at t = {t}: {last}")]
    StepAbort {
        failures: usize,
        t: f64,
        last: Box<Error>,
    },

    #[error("trajectory needs at least two saved states")]
    EmptyTrajectory,

    #[error("operation requires a potential with bounded domain")]
    KindMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn fmt_index(index: Option<usize>) -> String {
    match index {
        Some(i) => format!("index {i}"),
        None => "scalar input".to_string(),
    }
}

impl Error {
    pub(crate) fn domain(what: &'static str, index: Option<usize>, value: f64) -> Self {
        Error::DomainViolation { what, index, value }
    }

    /// True for the recoverable Newton failures that a smaller time step may fix.
    pub fn is_step_failure(&self) -> bool {
        matches!(
            self,
            Error::NewtonDivergence { .. } | Error::DampingFailure { .. } | Error::SolverFailure(_)
        )
    }
}
