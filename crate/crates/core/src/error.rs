use thiserror::Error;

/// Errors raised by the solvers and the verification harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge: {0}")]
    NonConvergence(String),

    #[error("CFL violation: requested {requested}, limit {limit}")]
    CflViolation { requested: f64, limit: f64 },

    #[error("quadrature under-resolved: relative change {change:e} on node doubling exceeds {limit:e}")]
    QuadratureUnderResolved { change: f64, limit: f64 },

    #[error("adaptive quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("insufficient samples: need {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("no contraction: ratio d_(k+1)/d_k >= 1 for {consecutive} consecutive iterations (last ratio {last_ratio})")]
    NoContraction { consecutive: usize, last_ratio: f64 },

    #[error("mass {m} lies in the forbidden interval ({lower}, {upper}) for Cauchy data with nonzero psi0")]
    ForbiddenInterval { m: f64, lower: f64, upper: f64 },

    #[error("late window underflow: error reached the rounding floor at t = {t}")]
    LateWindowUnderflow { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
