use thiserror::Error;

/// Errors raised anywhere in the model / solver stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function (tangent pole,
    /// vanishing comparison function, `p <= 1`, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The weight of a model problem vanishes inside the working interval.
    #[error("{factor} vanishes at s = {location} inside the working interval [0, {end}]")]
    Validation {
        factor: String,
        location: f64,
        end: f64,
    },

    /// The adaptive step controller could not make progress.
    #[error("step size underflow at s = {at} (h = {step:e})")]
    StepFailure { at: f64, step: f64 },

    /// Eigenvalue bracketing gave up after too many doublings.
    #[error("could not bracket the eigenvalue: last trial mu = {last_mu:e}")]
    BracketFailure { last_mu: f64 },

    /// An iterative minimizer hit its iteration cap.
    #[error("no convergence after {iterations} iterations (last quotient {last_value}, relative change {last_change:e})")]
    NoConvergence {
        iterations: usize,
        last_value: f64,
        last_change: f64,
    },

    /// The explicit flow step created a new sign change.
    #[error("explicit step overshoot at t = {time}: sign changes grew from {before} to {after}")]
    Stability {
        time: f64,
        before: usize,
        after: usize,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors that mean "the request describes an invalid domain"
    /// rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation { .. } | Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
