//! Quasi-energies near an N-th order resonance.
//!
//! Expanding the spectrum to second order about `E_r` and moving to the frame
//! rotating with the drive maps the near-resonant Floquet problem onto the
//! Mathieu equation with
//!
//! ```text
//! q  = 4 lambda V / (N^2 zeta hbar^2),
//! nu = 2k/N + 2 (omega - 1/N) / (N zeta hbar),
//! E_k = (hbar^2 N^2 zeta / 8) a(nu, q) - (omega - 1/N)^2 / (2 zeta) + Hbar_0.
//! ```
//!
//! At `q = 0` this is exactly `Hbar_0 + hbar (omega - 1/N) k + hbar^2 zeta k^2 / 2`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::drive::DriveParams;
use crate::error::{Error, Result};
use crate::spectra::SpectrumModel;

use super::MathieuSolver;

#[derive(Debug, Clone)]
pub struct ResonanceContext {
    pub spectrum: SpectrumModel,
    pub drive: DriveParams,
    /// Energy offset `Hbar_0`; `None` uses `E_r`.
    pub mean_energy: Option<f64>,
    pub solver: MathieuSolver,
}

/// One quasi-energy level with its Mathieu data.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiEnergyLevel {
    pub k_index: i64,
    pub nu: f64,
    pub q: f64,
    pub a: f64,
    pub energy: f64,
    /// Coefficients `c_n` of `exp(i(nu + 2n)z)`.
    pub coefficients: BTreeMap<i64, f64>,
}

impl ResonanceContext {
    pub fn new(spectrum: SpectrumModel, drive: DriveParams) -> Result<Self> {
        drive.validate()?;
        Ok(ResonanceContext { spectrum, drive, mean_energy: None, solver: MathieuSolver::default() })
    }

    pub fn with_mean_energy(mut self, hbar0: f64) -> Self {
        self.mean_energy = Some(hbar0);
        self
    }

    pub fn hbar0(&self) -> f64 {
        self.mean_energy.unwrap_or_else(|| self.spectrum.e_r())
    }

    fn order(&self) -> f64 {
        self.drive.order as f64
    }

    /// `omega - 1/N`.
    pub fn detuning(&self) -> f64 {
        self.spectrum.omega - self.drive.resonance_frequency()
    }

    fn zeta(&self) -> Result<f64> {
        if self.spectrum.zeta == 0.0 {
            Err(Error::VanishingNonlinearity)
        } else {
            Ok(self.spectrum.zeta)
        }
    }

    /// Mathieu parameter `q`.
    pub fn mathieu_q(&self) -> Result<f64> {
        let zeta = self.zeta()?;
        let n = self.order();
        let hbar = self.spectrum.hbar;
        Ok(4.0 * self.drive.lambda * self.drive.coupling / (n * n * zeta * hbar * hbar))
    }

    /// Mathieu order for the (real) offset `k = n - r`.
    pub fn nu_of_k(&self, k: f64) -> Result<f64> {
        let zeta = self.zeta()?;
        let n = self.order();
        Ok(2.0 * k / n + 2.0 * self.detuning() / (n * zeta * self.spectrum.hbar))
    }

    /// Quasi-energy as a smooth function of the real offset `k`.
    pub fn quasi_energy_at(&self, k: f64) -> Result<f64> {
        let nu = self.nu_of_k(k)?;
        let q = self.mathieu_q()?;
        let a = self.solver.characteristic_value(nu, q)?;
        Ok(self.energy_from(a))
    }

    fn energy_from(&self, a: f64) -> f64 {
        let n = self.order();
        let hbar = self.spectrum.hbar;
        let zeta = self.spectrum.zeta;
        hbar * hbar * n * n * zeta / 8.0 * a - self.detuning().powi(2) / (2.0 * zeta) + self.hbar0()
    }

    /// Quasi-energy level `k` with its Fourier coefficients.
    pub fn quasi_energy(&self, k_index: i64) -> Result<QuasiEnergyLevel> {
        let nu = self.nu_of_k(k_index as f64)?;
        let q = self.mathieu_q()?;
        let sol = self.solver.solve(nu, q)?;
        // The solver works at |nu|; reflecting n -> -n gives the coefficients at nu < 0.
        let coefficients = if nu < 0.0 {
            sol.coefficients.into_iter().map(|(n, c)| (-n, c)).collect()
        } else {
            sol.coefficients
        };
        Ok(QuasiEnergyLevel { k_index, nu, q, a: sol.a, energy: self.energy_from(sol.a), coefficients })
    }

    /// Floquet-state amplitudes keyed by level offset `m - r = k + N n`,
    /// `C = c_n exp(-i pi (nu + 2n) / 4)`.
    pub fn floquet_coefficients(&self, level: &QuasiEnergyLevel) -> BTreeMap<i64, Complex64> {
        let order = self.drive.order as i64;
        level
            .coefficients
            .iter()
            .map(|(&n, &c)| {
                let phase = -PI * (level.nu + 2.0 * n as f64) / 4.0;
                (level.k_index + order * n, Complex64::from_polar(c, phase))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::PowerLawSystem;

    fn context(lambda: f64, order: u32) -> ResonanceContext {
        let sys = PowerLawSystem::new(1.0, 1.0, 4.0, 1.0, 1.0).unwrap();
        let levels = SpectrumModel::power_law(&sys, 10.0).unwrap();
        ResonanceContext::new(levels, DriveParams::new(lambda, 0.3, order)).unwrap()
    }

    #[test]
    fn undriven_quasi_energies_match_rotating_frame_spectrum() {
        for order in [1, 2, 3] {
            let ctx = context(0.0, order);
            let s = &ctx.spectrum;
            for k in -4..=4 {
                let e = ctx.quasi_energy(k).unwrap().energy;
                let kf = k as f64;
                let expect = s.e_r() + s.hbar * ctx.detuning() * kf + 0.5 * s.hbar * s.hbar * s.zeta * kf * kf;
                assert!((e - expect).abs() < 1e-9 * expect.abs(), "N={order} k={k}: {e} vs {expect}");
            }
        }
    }

    #[test]
    fn harmonic_spectrum_has_no_mathieu_reduction() {
        let sys = PowerLawSystem::new(0.5, 1.0, 2.0, 1.0, 1.0).unwrap();
        let levels = SpectrumModel::power_law(&sys, 5.0).unwrap();
        let ctx = ResonanceContext::new(levels, DriveParams::new(0.1, 1.0, 1)).unwrap();
        assert_eq!(ctx.mathieu_q(), Err(Error::VanishingNonlinearity));
        assert_eq!(ctx.nu_of_k(1.0), Err(Error::VanishingNonlinearity));
    }

    #[test]
    fn floquet_coefficients_are_real_up_to_the_rotation_phase() {
        let ctx = context(0.05, 1);
        let level = ctx.quasi_energy(2).unwrap();
        let c = ctx.floquet_coefficients(&level);
        let mut total = 0.0;
        for (&m, &amp) in &c {
            let n = m - 2;
            let undo = Complex64::from_polar(1.0, PI * (level.nu + 2.0 * n as f64) / 4.0);
            assert!((amp * undo).im.abs() < 1e-14);
            total += amp.norm_sqr();
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_order_reflects_coefficients() {
        let ctx = context(0.05, 1);
        let k = -30;
        let level = ctx.quasi_energy(k).unwrap();
        assert!(level.nu < 0.0);
        let c = |n: i64| level.coefficients.get(&n).copied().unwrap_or(0.0);
        for n in -5..5 {
            let x = level.nu + 2.0 * n as f64;
            let res = x * x * c(n) + level.q * (c(n - 1) + c(n + 1)) - level.a * c(n);
            assert!(res.abs() < 1e-9, "n={n}: {res}");
        }
    }

    #[test]
    fn mean_energy_shifts_every_level() {
        let ctx = context(0.05, 2);
        let shifted = ctx.clone().with_mean_energy(ctx.hbar0() + 3.0);
        let a = ctx.quasi_energy_at(0.3).unwrap();
        let b = shifted.quasi_energy_at(0.3).unwrap();
        assert!((b - a - 3.0).abs() < 1e-9);
    }
}
