//! Classical periods and quantum revival times of driven and undriven wells.
//!
//! A drive `lambda V(z) sin t` resonant with the `N`-th harmonic changes the
//! classical period and the revival time of a wave packet centred at level `r`:
//!
//! ```text
//! T_cl(lambda) = (1 - M_cl) T0_cl Delta,     T_Q(lambda) = (1 - M_Q) T0_Q,
//! Delta = 1 / (1 - 1/(N omega)),             mu = N^2 hbar zeta Delta / (2 omega),
//! M_cl = -1/2 x^2 / (1 - mu^2)^2,            M_Q = 1/2 x^2 (3 + mu^2) / (1 - mu^2)^3,
//! x = lambda V zeta Delta^2 / omega^2.
//! ```

mod regimes;

pub use regimes::{
    classify, powerlaw_interdependence, strong_regime, weak_regime, Regime, RegimeReport,
    RegimeThresholds,
};

use std::f64::consts::PI;

use crate::drive::DriveParams;
use crate::error::{Error, Result};
use crate::mathieu::ResonanceContext;
use crate::time::Time;

/// Relative distance to a singularity below which it is reported as an error.
pub const SINGULARITY_EPSILON: f64 = 1e-9;

/// Resonance factor `Delta`; exactly 1 for an undriven system.
pub fn delta(omega: f64, drive: &DriveParams) -> Result<f64> {
    if drive.lambda == 0.0 {
        return Ok(1.0);
    }
    if !omega.is_finite() || omega == 0.0 {
        return Err(Error::Domain(format!("omega must be finite and nonzero, got {omega}")));
    }
    let omega_n = drive.resonance_frequency();
    if (omega - omega_n).abs() < SINGULARITY_EPSILON * omega_n {
        return Err(Error::ResonanceSingularity { omega, omega_n, epsilon: SINGULARITY_EPSILON });
    }
    Ok(1.0 / (1.0 - omega_n / omega))
}

/// Perturbation parameter `mu = N^2 hbar zeta Delta / (2 omega)`.
pub fn mu(order: u32, hbar: f64, zeta: f64, delta: f64, omega: f64) -> Result<f64> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::Domain(format!("omega must be finite and nonzero, got {omega}")));
    }
    let n = order as f64;
    Ok(n * n * hbar * zeta * delta / (2.0 * omega))
}

/// Time modification factors `M_cl` and `M_Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModFactors {
    pub m_cl: f64,
    pub m_q: f64,
}

pub fn mod_factors(lambda: f64, coupling: f64, zeta: f64, delta: f64, omega: f64, mu: f64) -> Result<ModFactors> {
    let gap = (1.0 - mu * mu).abs();
    if gap < SINGULARITY_EPSILON {
        return Err(Error::PerturbationBreakdown { mu, gap });
    }
    let x = lambda * coupling * zeta * delta * delta / (omega * omega);
    let x2 = x * x;
    let d = 1.0 - mu * mu;
    Ok(ModFactors { m_cl: -0.5 * x2 / (d * d), m_q: 0.5 * x2 * (3.0 + mu * mu) / (d * d * d) })
}

/// `(T_cl(lambda), T_Q(lambda))` from the undriven times.
pub fn driven_times(t0_cl: f64, t0_q: Time, delta: f64, factors: ModFactors) -> (f64, Time) {
    ((1.0 - factors.m_cl) * t0_cl * delta, t0_q.scale(1.0 - factors.m_q))
}

/// Every time scale of a driven system at one resonance.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeScales {
    pub delta: f64,
    pub mu: f64,
    /// Mathieu parameter; `None` when the nonlinearity vanishes.
    pub q: Option<f64>,
    pub m_cl: f64,
    pub m_q: f64,
    pub t0_cl: f64,
    pub t0_q: Time,
    pub tl_cl: f64,
    pub tl_q: Time,
    /// `1/2 (lambda V zeta / omega^2)^2`.
    pub alpha: f64,
    /// `q^2 / 2`.
    pub beta: f64,
    pub regime: Regime,
}

impl TimeScales {
    pub fn evaluate(ctx: &ResonanceContext, thresholds: &RegimeThresholds) -> Result<Self> {
        let s = &ctx.spectrum;
        let drive = &ctx.drive;
        let (t0_cl, t0_q) = s.unmodulated_times();
        let t0_cl = t0_cl.finite().expect("classical period is finite");
        let delta = delta(s.omega, drive)?;
        let mu = mu(drive.order, s.hbar, s.zeta, delta, s.omega)?;
        let factors = mod_factors(drive.lambda, drive.coupling, s.zeta, delta, s.omega, mu)?;
        let (tl_cl, tl_q) = driven_times(t0_cl, t0_q, delta, factors);
        let q = if s.zeta == 0.0 { None } else { Some(ctx.mathieu_q()?) };
        let alpha = 0.5 * (drive.lambda * drive.coupling * s.zeta / (s.omega * s.omega)).powi(2);
        let beta = q.map_or(0.0, |q| 0.5 * q * q);
        let regime = classify(s.zeta, mu, q.unwrap_or(0.0), thresholds);
        Ok(TimeScales {
            delta,
            mu,
            q,
            m_cl: factors.m_cl,
            m_q: factors.m_q,
            t0_cl,
            t0_q,
            tl_cl,
            tl_q,
            alpha,
            beta,
            regime,
        })
    }

    pub fn factors(&self) -> ModFactors {
        ModFactors { m_cl: self.m_cl, m_q: self.m_q }
    }
}

/// Finite-difference settings for [`timescale_j`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeOptions {
    /// Step in `n`; `None` picks `noise^(1/(j+4)) * max(1, |n0|)`.
    pub step: Option<f64>,
    /// Relative accuracy of the supplied energies.
    pub noise: f64,
    /// Largest relative disagreement between the `h` and `h/2` estimates.
    pub tolerance: f64,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        DerivativeOptions { step: None, noise: f64::EPSILON, tolerance: 1e-3 }
    }
}

fn central_difference(energy: &dyn Fn(f64) -> Result<f64>, n0: f64, j: u32, h: f64) -> Result<(f64, f64)> {
    let e = |x: f64| energy(n0 + x * h);
    let (d, scale) = match j {
        1 => {
            let (p, m) = (e(1.0)?, e(-1.0)?);
            ((p - m) / (2.0 * h), p.abs().max(m.abs()) / h)
        }
        2 => {
            let (p, c, m) = (e(1.0)?, e(0.0)?, e(-1.0)?);
            ((p - 2.0 * c + m) / (h * h), 4.0 * p.abs().max(c.abs()).max(m.abs()) / (h * h))
        }
        3 => {
            let (p2, p1, m1, m2) = (e(2.0)?, e(1.0)?, e(-1.0)?, e(-2.0)?);
            let big = p2.abs().max(p1.abs()).max(m1.abs()).max(m2.abs());
            ((p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h), 3.0 * big / (h * h * h))
        }
        _ => unreachable!(),
    };
    Ok((d, scale))
}

/// Time scale `2 pi / omega_j` with `omega_j = E^(j)(n0) / (j! hbar)`.
///
/// `j = 1` is the classical period and `j = 2` the revival time. A derivative
/// indistinguishable from rounding noise gives [`Time::Unbounded`].
pub fn timescale_j(
    energy: &dyn Fn(f64) -> Result<f64>,
    n0: f64,
    j: u32,
    hbar: f64,
    options: &DerivativeOptions,
) -> Result<Time> {
    if !(1..=3).contains(&j) {
        return Err(Error::InvalidInput(format!("derivative order must be 1, 2 or 3, got {j}")));
    }
    let h = options
        .step
        .unwrap_or_else(|| options.noise.powf(1.0 / (j as f64 + 4.0)) * n0.abs().max(1.0));
    let (coarse, scale) = central_difference(energy, n0, j, h)?;
    let (fine, fine_scale) = central_difference(energy, n0, j, 0.5 * h)?;
    let floor = 100.0 * options.noise;
    if coarse.abs() <= floor * scale && fine.abs() <= floor * fine_scale {
        return Ok(Time::Unbounded);
    }
    if (coarse - fine).abs() > options.tolerance * fine.abs() {
        return Err(Error::DerivativeInstability { order: j, coarse, fine });
    }
    let derivative = (4.0 * fine - coarse) / 3.0;
    let factorial = (1..=j).product::<u32>() as f64;
    Ok(Time::Finite(2.0 * PI * factorial * hbar / derivative))
}
