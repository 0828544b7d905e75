use thiserror::Error;

/// Failure modes shared by every computation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The nonlinearity vanishes, so the Mathieu reduction has no finite parameters.
    #[error("vanishing nonlinearity (zeta = 0): the Mathieu reduction degenerates")]
    VanishingNonlinearity,

    #[error("resonance singularity: omega = {omega} lies within {epsilon:e} of 1/N = {omega_n}")]
    ResonanceSingularity { omega: f64, omega_n: f64, epsilon: f64 },

    #[error("perturbation breakdown: |1 - mu^2| = {gap:e} for mu = {mu}")]
    PerturbationBreakdown { mu: f64, gap: f64 },

    #[error("no convergence at cutoff {cutoff}: last iterates {last} and {previous}")]
    NonConvergence { cutoff: usize, last: f64, previous: f64 },

    #[error("derivative of order {order} unstable: {coarse} at step h, {fine} at h/2")]
    DerivativeInstability { order: u32, coarse: f64, fine: f64 },

    #[error("numeric spectrum not converged: level {level} moved by {shift:e} under grid refinement")]
    SpectrumNotConverged { level: usize, shift: f64 },

    #[error("grid too small: boundary amplitude {amplitude:e} exceeds {limit:e}")]
    GridTooSmall { amplitude: f64, limit: f64 },

    #[error("propagation unstable at t = {t}: {reason}")]
    Unstable { t: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput(msg()))
    }
}
