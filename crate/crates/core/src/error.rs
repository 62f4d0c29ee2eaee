use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid size {0} is invalid: need an even number of nodes, at least 8")]
    InvalidGrid(usize),

    #[error("expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("samples have mean {mean:e}, allowed at most {allowed:e}; project the mean out explicitly")]
    MeanNotZero { mean: f64, allowed: f64 },

    #[error("fields live on different grids (n = {left} and n = {right})")]
    GridMismatch { left: usize, right: usize },

    #[error("derivative of the barrier requested at xi = {xi} outside (-a, inf) with a = {a}")]
    DomainError { xi: f64, a: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state is inadmissible: min(u_xx + a) = {min_slope:e}")]
    Inadmissible { min_slope: f64 },

    #[error("initial datum is under-resolved: {fraction:e} of its energy sits in the top quarter of the spectrum")]
    SpectralUnderresolved { fraction: f64 },

    #[error("Newton solver did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    NonConvergence { iterations: usize, grad_norm: f64 },

    #[error("line search kept hitting the slope floor delta_min (iteration {iteration}, step length {step_length:e})")]
    SafeguardTriggered { iteration: usize, step_length: f64 },

    #[error("time step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Innermost error, looking through `StepFailed` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::StepFailed { source, .. } => source.root(),
            other => other,
        }
    }
}
