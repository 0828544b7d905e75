//! Asymptotic regimes and the relations they impose between time scales.

use crate::drive::DriveParams;
use crate::error::{Error, Result};
use crate::mathieu::ResonanceContext;
use crate::spectra::{powerlaw_omega, powerlaw_zeta, unmodulated_times, PowerLawSystem};
use crate::time::Time;

use super::{delta, TimeScales};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `zeta = 0`: linear spectrum, no revivals.
    Vanishing,
    Weak,
    Strong,
    /// Neither asymptotic form applies.
    Intermediate,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Vanishing => "vanishing",
            Regime::Weak => "weak",
            Regime::Strong => "strong",
            Regime::Intermediate => "intermediate",
        }
    }
}

/// Boundaries of the asymptotic regimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// Weak: `|mu| < weak_mu` ...
    pub weak_mu: f64,
    /// ... and `|q| < weak_q`.
    pub weak_q: f64,
    /// Strong: `|mu| > strong_mu` ...
    pub strong_mu: f64,
    /// ... and `beta < strong_beta`.
    pub strong_beta: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds { weak_mu: 0.1, weak_q: 1.0, strong_mu: 10.0, strong_beta: 0.1 }
    }
}

pub fn classify(zeta: f64, mu: f64, q: f64, thresholds: &RegimeThresholds) -> Regime {
    if zeta == 0.0 {
        Regime::Vanishing
    } else if mu.abs() < thresholds.weak_mu && q.abs() < thresholds.weak_q {
        Regime::Weak
    } else if mu.abs() > thresholds.strong_mu && 0.5 * q * q < thresholds.strong_beta {
        Regime::Strong
    } else {
        Regime::Intermediate
    }
}

/// Outcome of checking one regime relation.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    /// `(lhs - rhs) / |rhs|` with the regime's own modification factors.
    pub residual: f64,
    /// Same relation evaluated with the general modification factors.
    pub model_residual: Option<f64>,
    pub c_k: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

/// `3 Tl_cl T0_Q + Delta T0_cl Tl_Q = 4 Delta T0_Q T0_cl`, normalized by the right side.
fn weak_relation(tl_cl: f64, tl_q: Time, t0_cl: f64, t0_q: Time, delta: f64) -> f64 {
    match (t0_q, tl_q) {
        (Time::Finite(t0_q), Time::Finite(tl_q)) => {
            let rhs = 4.0 * delta * t0_q * t0_cl;
            (3.0 * tl_cl * t0_q + delta * t0_cl * tl_q - rhs) / rhs.abs()
        }
        _ => {
            // Divided through by T0_Q Tl_Q.
            let rhs = 4.0 * delta * t0_cl * tl_q.rate();
            let lhs = 3.0 * tl_cl * tl_q.rate() + delta * t0_cl * t0_q.rate();
            if lhs == rhs {
                0.0
            } else {
                (lhs - rhs) / rhs.abs()
            }
        }
    }
}

/// `Tl_cl T0_Q - Delta T0_cl Tl_Q = 0`, normalized by `Tl_cl T0_Q`.
fn strong_relation(tl_cl: f64, tl_q: Time, t0_cl: f64, t0_q: Time, delta: f64) -> f64 {
    match (t0_q, tl_q) {
        (Time::Finite(t0_q), Time::Finite(tl_q)) => {
            (tl_cl * t0_q - delta * t0_cl * tl_q) / (tl_cl * t0_q).abs()
        }
        _ => {
            let lhs = tl_cl * tl_q.rate() - delta * t0_cl * t0_q.rate();
            let norm = (tl_cl * tl_q.rate()).abs();
            if lhs == 0.0 {
                0.0
            } else {
                lhs / norm
            }
        }
    }
}

/// Weak-nonlinearity relation with `M_cl = -alpha`, `M_Q = 3 alpha`.
pub fn weak_regime(ctx: &ResonanceContext, times: &TimeScales) -> RegimeReport {
    let s = &ctx.spectrum;
    let alpha = 0.5 * (ctx.drive.lambda * ctx.drive.coupling * s.zeta / (s.omega * s.omega)).powi(2);
    let tl_cl = (1.0 + alpha) * times.t0_cl * times.delta;
    let tl_q = times.t0_q.scale(1.0 - 3.0 * alpha);
    RegimeReport {
        regime: Regime::Weak,
        residual: weak_relation(tl_cl, tl_q, times.t0_cl, times.t0_q, times.delta),
        model_residual: Some(weak_relation(times.tl_cl, times.tl_q, times.t0_cl, times.t0_q, times.delta)),
        c_k: None,
        alpha: Some(alpha),
        beta: None,
    }
}

/// Strong-nonlinearity relation with `M_cl = M_Q = -beta`, `beta = q^2 / 2`.
pub fn strong_regime(ctx: &ResonanceContext, times: &TimeScales) -> Result<RegimeReport> {
    let q = ctx.mathieu_q()?;
    let beta = 0.5 * q * q;
    let tl_cl = (1.0 + beta) * times.t0_cl * times.delta;
    let tl_q = times.t0_q.scale(1.0 + beta);
    Ok(RegimeReport {
        regime: Regime::Strong,
        residual: strong_relation(tl_cl, tl_q, times.t0_cl, times.t0_q, times.delta),
        model_residual: Some(strong_relation(times.tl_cl, times.tl_q, times.t0_cl, times.t0_q, times.delta)),
        c_k: None,
        alpha: None,
        beta: Some(beta),
    })
}

/// Linear relation between the driven times of a power-law well,
/// `Tl_Q = -3 C_k Tl_cl + 4 T0_Q` (weak) or `Tl_Q = C_k Tl_cl` (strong), with
/// `C_k = (2/Delta) ((k+2)/(k-2)) (r + 1/2)`.
pub fn powerlaw_interdependence(
    sys: &PowerLawSystem,
    r: f64,
    drive: &DriveParams,
    regime: Regime,
) -> Result<RegimeReport> {
    if sys.is_harmonic() {
        return Err(Error::Domain("C_k is undefined for a harmonic well".into()));
    }
    let k = sys.k_exp;
    let omega = powerlaw_omega(sys, r)?;
    let zeta = powerlaw_zeta(sys, r)?;
    let delta = delta(omega, drive)?;
    let c_k = 2.0 / delta * (k + 2.0) / (k - 2.0) * (r + 0.5);
    let (t0_cl, t0_q) = unmodulated_times(sys, r)?;
    let (t0_cl, t0_q) = (t0_cl.finite().unwrap_or(f64::NAN), t0_q.finite().unwrap_or(f64::NAN));
    let report = |residual, alpha, beta| RegimeReport {
        regime,
        residual,
        model_residual: None,
        c_k: Some(c_k),
        alpha,
        beta,
    };
    match regime {
        Regime::Weak => {
            let alpha = 0.5 * (drive.lambda * drive.coupling * zeta / (omega * omega)).powi(2);
            let tl_cl = (1.0 + alpha) * t0_cl * delta;
            let tl_q = (1.0 - 3.0 * alpha) * t0_q;
            let rhs = -3.0 * c_k * tl_cl + 4.0 * t0_q;
            Ok(report((tl_q - rhs) / rhs.abs(), Some(alpha), None))
        }
        Regime::Strong => {
            let n = drive.order as f64;
            let q = 4.0 * drive.lambda * drive.coupling / (n * n * zeta * sys.hbar * sys.hbar);
            let beta = 0.5 * q * q;
            let tl_cl = (1.0 + beta) * t0_cl * delta;
            let tl_q = (1.0 + beta) * t0_q;
            let rhs = c_k * tl_cl;
            Ok(report((tl_q - rhs) / rhs.abs(), None, Some(beta)))
        }
        Regime::Vanishing | Regime::Intermediate => Err(Error::Domain(format!(
            "no interdependence relation in the {} regime",
            regime.name()
        ))),
    }
}
