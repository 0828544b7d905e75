//! Wave-packet propagation under `H0 + lambda V(z) sin t`.
//!
//! The packet is a Gaussian superposition of finite-difference eigenstates of
//! `H0` on the propagation grid. It is advanced with a second-order
//! split-operator scheme (FFT kinetic factors, drive evaluated at mid-step)
//! and its autocorrelation `A(t) = <psi(0)|psi(t)>` is sampled along the way.
//! [`detect_times`] reads the classical period and the revival time off `|A|^2`.

mod detect;
mod packet;
mod split;

pub use detect::{detect_times, find_peaks, DetectConfig, Peak, RevivalCandidate, RevivalEstimate};
pub use packet::{init_packet, PreparedPacket, WavePacketState, EDGE_LIMIT};
pub use split::{evolve, AutocorrelationSeries, Frame, Propagator, RotatingFrame, LEAK_LIMIT, NORM_LIMIT};

use std::f64::consts::PI;

use crate::error::{ensure, Result};
use crate::spectra::{box_half_width, Potential};

/// Uniform periodic grid; samples sit at `z_min + (j + 1/2) dz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub z_min: f64,
    pub z_max: f64,
    pub n_points: usize,
    pub dt: f64,
}

pub const MIN_POINTS: usize = 256;

impl Grid {
    pub fn new(z_min: f64, z_max: f64, n_points: usize, dt: f64) -> Result<Self> {
        ensure(z_min.is_finite() && z_max.is_finite() && z_max > z_min, || {
            format!("grid bounds must satisfy z_min < z_max, got [{z_min}, {z_max}]")
        })?;
        ensure(n_points >= MIN_POINTS && n_points.is_power_of_two(), || {
            format!("grid size must be a power of two >= {MIN_POINTS}, got {n_points}")
        })?;
        ensure(dt.is_finite() && dt != 0.0, || format!("time step must be finite and nonzero, got {dt}"))?;
        Ok(Grid { z_min, z_max, n_points, dt })
    }

    pub fn symmetric(half_width: f64, n_points: usize, dt: f64) -> Result<Self> {
        Grid::new(-half_width, half_width, n_points, dt)
    }

    /// Box whose half-width puts the turning point of `top_level` at
    /// `turning_fraction` of the way to the wall.
    pub fn for_potential(
        potential: &dyn Potential,
        mass: f64,
        hbar: f64,
        top_level: usize,
        turning_fraction: f64,
        n_points: usize,
        dt: f64,
    ) -> Result<Self> {
        let half = box_half_width(potential, mass, hbar, top_level + 1, turning_fraction)?;
        Grid::symmetric(half, n_points, dt)
    }

    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / self.n_points as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        let dz = self.dz();
        (0..self.n_points).map(|j| self.z_min + (j as f64 + 0.5) * dz).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * PI / (n as f64 * self.dz());
        (0..n)
            .map(|j| if j < n / 2 { j as f64 * dk } else { (j as f64 - n as f64) * dk })
            .collect()
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        let g = Grid::new(-2.0, 2.0, 512, 1e-3).unwrap();
        assert!((g.dz() * g.n_points as f64 - 4.0).abs() < 1e-14);
        let z = g.positions();
        assert!((z[0] + z[511]).abs() < 1e-14);
        let k = g.wavenumbers();
        assert_eq!(k[0], 0.0);
        assert!(k[256] < 0.0);
        assert!(Grid::new(-1.0, 1.0, 300, 1e-3).is_err());
        assert!(Grid::new(-1.0, 1.0, 128, 1e-3).is_err());
        assert!(Grid::new(1.0, -1.0, 256, 1e-3).is_err());
        assert!(Grid::new(-1.0, 1.0, 256, 0.0).is_err());
    }
}
