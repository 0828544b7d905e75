//! Energy spectra of power-law wells and derived frequencies.
//!
//! The semiclassical spectrum of `V(z) = V0 |z/a|^k` is
//!
//! ```text
//! E_n = [ (n + 1/2) pi hbar / (2 a sqrt(2m)) * V0^(1/k)
//!         * Gamma(1/k + 3/2) / (Gamma(1/k + 1) Gamma(3/2)) ]^(2k/(k+2))
//! ```
//!
//! Its first and second derivatives in `n` give the classical frequency
//! `omega` and the nonlinearity `zeta`, from which the classical period and
//! the quantum revival time follow.

mod numeric;

pub use numeric::{
    box_half_width, coupling_matrix_element, fd_hamiltonian, grid_eigenstates, numeric_spectrum, turning_point,
    wkb_energy, FnPotential, GridEigenstates, NumericSpectrum, NumericSpectrumConfig, Potential,
    SquareWell,
};

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{ensure, Error, Result};
use crate::time::Time;

/// Exponents closer than this to 2 are treated as harmonic.
pub const HARMONIC_TOLERANCE: f64 = 1e-9;

/// Parameters of the well `V(z) = V0 |z/a|^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawSystem {
    pub v0: f64,
    pub a: f64,
    pub k_exp: f64,
    pub mass: f64,
    pub hbar: f64,
}

impl PowerLawSystem {
    pub fn new(v0: f64, a: f64, k_exp: f64, mass: f64, hbar: f64) -> Result<Self> {
        let sys = PowerLawSystem { v0, a, k_exp, mass, hbar };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("V0", self.v0),
            ("a", self.a),
            ("k", self.k_exp),
            ("mass", self.mass),
            ("hbar", self.hbar),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn is_harmonic(&self) -> bool {
        (self.k_exp - 2.0).abs() < HARMONIC_TOLERANCE
    }

    /// `V(z)`.
    pub fn potential(&self, z: f64) -> f64 {
        self.v0 * (z / self.a).abs().powf(self.k_exp)
    }

    /// Spectrum exponent `2k/(k+2)`.
    fn exponent(&self) -> f64 {
        2.0 * self.k_exp / (self.k_exp + 2.0)
    }

    fn check_level(&self, n: f64) -> Result<()> {
        self.validate()?;
        if !(n.is_finite() && n >= 0.0) {
            return Err(Error::Domain(format!("level index must be finite and >= 0, got {n}")));
        }
        Ok(())
    }
}

/// Semiclassical energy of level `n` (real `n >= 0` allowed).
pub fn powerlaw_energy(sys: &PowerLawSystem, n: f64) -> Result<f64> {
    sys.check_level(n)?;
    let inv_k = 1.0 / sys.k_exp;
    let ln_gamma_ratio = ln_gamma(inv_k + 1.5) - ln_gamma(inv_k + 1.0) - ln_gamma(1.5);
    let ln_base = ((n + 0.5) * PI * sys.hbar / (2.0 * sys.a * (2.0 * sys.mass).sqrt())).ln()
        + inv_k * sys.v0.ln()
        + ln_gamma_ratio;
    Ok((sys.exponent() * ln_base).exp())
}

/// Classical frequency `omega = (1/hbar) dE/dn` at level `r`.
pub fn powerlaw_omega(sys: &PowerLawSystem, r: f64) -> Result<f64> {
    let e = powerlaw_energy(sys, r)?;
    Ok(sys.exponent() * e / (sys.hbar * (r + 0.5)))
}

/// Nonlinearity `zeta = (1/hbar^2) d^2E/dn^2` at level `r`; exactly zero for `k = 2`.
pub fn powerlaw_zeta(sys: &PowerLawSystem, r: f64) -> Result<f64> {
    let e = powerlaw_energy(sys, r)?;
    if sys.is_harmonic() {
        return Ok(0.0);
    }
    let k = sys.k_exp;
    let factor = 2.0 * k * (k - 2.0) / ((k + 2.0) * (k + 2.0));
    Ok(factor * e / (sys.hbar * sys.hbar * (r + 0.5) * (r + 0.5)))
}

/// Classical period `2 pi / omega` and quantum revival time `4 pi / (hbar zeta)`.
///
/// The revival time is negative for `k < 2` and unbounded for `k = 2`.
pub fn unmodulated_times(sys: &PowerLawSystem, r: f64) -> Result<(Time, Time)> {
    let omega = powerlaw_omega(sys, r)?;
    let zeta = powerlaw_zeta(sys, r)?;
    Ok(times_from_derivatives(omega, zeta, sys.hbar))
}

pub(crate) fn times_from_derivatives(omega: f64, zeta: f64, hbar: f64) -> (Time, Time) {
    let t_cl = Time::Finite(2.0 * PI / omega);
    let t_q = if zeta == 0.0 { Time::Unbounded } else { Time::Finite(4.0 * PI / (hbar * zeta)) };
    (t_cl, t_q)
}

/// Source of the level energies behind a [`SpectrumModel`].
#[derive(Debug, Clone, PartialEq)]
pub enum LevelSource {
    PowerLaw(PowerLawSystem),
    /// Energies of levels `0, 1, 2, ...`, interpolated for real indices.
    Tabulated(Vec<f64>),
    /// Second-order expansion about `r` with the stored `omega`, `zeta`.
    Quadratic { e_r: f64 },
}

/// Spectrum near a reference level `r` together with its local derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumModel {
    pub source: LevelSource,
    pub r: f64,
    pub hbar: f64,
    pub omega: f64,
    pub zeta: f64,
}

impl SpectrumModel {
    pub fn power_law(sys: &PowerLawSystem, r: f64) -> Result<Self> {
        Ok(SpectrumModel {
            source: LevelSource::PowerLaw(*sys),
            r,
            hbar: sys.hbar,
            omega: powerlaw_omega(sys, r)?,
            zeta: powerlaw_zeta(sys, r)?,
        })
    }

    /// Model built from tabulated levels; derivatives are unit-step central
    /// differences of the interpolated table around `r`.
    pub fn tabulated(levels: Vec<f64>, hbar: f64, r: f64) -> Result<Self> {
        ensure(hbar > 0.0 && hbar.is_finite(), || format!("hbar must be > 0, got {hbar}"))?;
        ensure(levels.len() >= 4, || "at least four tabulated levels are required".into())?;
        ensure(r >= 1.0 && r <= (levels.len() - 2) as f64, || {
            format!("reference level {r} needs a neighbour on each side in a table of {}", levels.len())
        })?;
        let e = |n: f64| interpolate(&levels, n);
        let (em, e0, ep) = (e(r - 1.0), e(r), e(r + 1.0));
        let omega = (ep - em) / (2.0 * hbar);
        let zeta = (ep - 2.0 * e0 + em) / (hbar * hbar);
        Ok(SpectrumModel { source: LevelSource::Tabulated(levels), r, hbar, omega, zeta })
    }

    pub fn quadratic(e_r: f64, omega: f64, zeta: f64, hbar: f64, r: f64) -> Result<Self> {
        ensure(hbar > 0.0 && hbar.is_finite(), || format!("hbar must be > 0, got {hbar}"))?;
        ensure(omega.is_finite() && omega != 0.0, || format!("omega must be finite and nonzero, got {omega}"))?;
        ensure(zeta.is_finite() && e_r.is_finite(), || "energy and zeta must be finite".into())?;
        Ok(SpectrumModel { source: LevelSource::Quadratic { e_r }, r, hbar, omega, zeta })
    }

    /// Energy at real level index `n`.
    pub fn energy(&self, n: f64) -> Result<f64> {
        match &self.source {
            LevelSource::PowerLaw(sys) => powerlaw_energy(sys, n),
            LevelSource::Tabulated(levels) => {
                if n < 0.0 || n > (levels.len() - 1) as f64 {
                    return Err(Error::Domain(format!("level {n} outside the tabulated range")));
                }
                Ok(interpolate(levels, n))
            }
            LevelSource::Quadratic { e_r } => {
                let d = n - self.r;
                Ok(e_r + self.hbar * self.omega * d + 0.5 * self.hbar * self.hbar * self.zeta * d * d)
            }
        }
    }

    pub fn e_r(&self) -> f64 {
        self.energy(self.r).expect("reference level lies inside the model domain")
    }

    pub fn unmodulated_times(&self) -> (Time, Time) {
        times_from_derivatives(self.omega, self.zeta, self.hbar)
    }
}

/// Cubic Lagrange interpolation through the four nearest table entries.
fn interpolate(levels: &[f64], n: f64) -> f64 {
    let last = levels.len() - 1;
    let i = n.floor() as usize;
    if n == n.floor() && i <= last {
        return levels[i];
    }
    let start = i.saturating_sub(1).min(last.saturating_sub(3));
    let xs: Vec<f64> = (start..start + 4).map(|j| j as f64).collect();
    let mut out = 0.0;
    for (a, &xa) in xs.iter().enumerate() {
        let mut w = 1.0;
        for (b, &xb) in xs.iter().enumerate() {
            if a != b {
                w *= (n - xb) / (xa - xb);
            }
        }
        out += w * levels[start + a];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(k: f64) -> PowerLawSystem {
        PowerLawSystem::new(1.0, 1.0, k, 1.0, 1.0).unwrap()
    }

    #[test]
    fn harmonic_levels_are_equally_spaced() {
        // V0 = 1/2, a = 1, m = 1: omega = 1.
        let s = PowerLawSystem::new(0.5, 1.0, 2.0, 1.0, 1.0).unwrap();
        for n in 0..10 {
            let e = powerlaw_energy(&s, n as f64).unwrap();
            assert!((e - (n as f64 + 0.5)).abs() < 1e-13, "n={n}: {e}");
        }
        assert!((powerlaw_omega(&s, 3.0).unwrap() - 1.0).abs() < 1e-13);
        assert_eq!(powerlaw_zeta(&s, 3.0).unwrap(), 0.0);
        let (t_cl, t_q) = unmodulated_times(&s, 3.0).unwrap();
        assert!((t_cl.finite().unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!(t_q.is_unbounded());
    }

    #[test]
    fn square_well_limit_scales_as_n_squared() {
        let s = sys(1e6);
        let e1 = powerlaw_energy(&s, 1.0).unwrap();
        let e3 = powerlaw_energy(&s, 3.0).unwrap();
        let ratio = e3 / e1;
        assert!((ratio - (3.5f64 / 1.5).powi(2)).abs() < 1e-4, "{ratio}");
    }

    #[test]
    fn sub_harmonic_revival_time_is_negative() {
        let (_, t_q) = unmodulated_times(&sys(1.0), 10.0).unwrap();
        assert!(t_q.finite().unwrap() < 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PowerLawSystem::new(-1.0, 1.0, 2.0, 1.0, 1.0).is_err());
        assert!(PowerLawSystem::new(1.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(powerlaw_energy(&sys(4.0), -0.5).is_err());
        assert!(powerlaw_energy(&sys(4.0), f64::NAN).is_err());
    }

    #[test]
    fn quadratic_model_reproduces_its_derivatives() {
        let m = SpectrumModel::quadratic(10.0, 2.0, 0.1, 1.0, 5.0).unwrap();
        assert_eq!(m.e_r(), 10.0);
        assert!((m.energy(6.0).unwrap() - 12.05).abs() < 1e-14);
    }

    #[test]
    fn tabulated_model_matches_power_law_derivatives() {
        let s = sys(4.0);
        let levels: Vec<f64> = (0..40).map(|n| powerlaw_energy(&s, n as f64).unwrap()).collect();
        let m = SpectrumModel::tabulated(levels, 1.0, 20.0).unwrap();
        let exact = SpectrumModel::power_law(&s, 20.0).unwrap();
        assert!((m.omega / exact.omega - 1.0).abs() < 1e-4);
        assert!((m.zeta / exact.zeta - 1.0).abs() < 1e-2);
        assert!((m.energy(20.5).unwrap() / powerlaw_energy(&s, 20.5).unwrap() - 1.0).abs() < 1e-6);
    }
}
