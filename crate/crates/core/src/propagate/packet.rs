use num_complex::Complex64;

use crate::error::{ensure, Error, Result};
use crate::spectra::{grid_eigenstates, GridEigenstates, Potential};

use super::Grid;

/// Largest edge amplitude, relative to the peak, accepted for a fresh packet.
pub const EDGE_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct WavePacketState {
    pub grid: Grid,
    pub psi: Vec<Complex64>,
    pub t: f64,
}

impl WavePacketState {
    /// `sum |psi|^2 dz`.
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dz()
    }

    /// `<self|other> = sum conj(self) other dz`.
    pub fn overlap(&self, other: &WavePacketState) -> Complex64 {
        self.psi.iter().zip(&other.psi).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.grid.dz()
    }

    /// Largest `|psi|` within `width` points of either end, relative to the peak.
    pub fn edge_amplitude(&self, width: usize) -> f64 {
        let peak = self.psi.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        let n = self.psi.len();
        let w = width.min(n / 2);
        let edge = self.psi[..w].iter().chain(&self.psi[n - w..]).fold(0.0_f64, |m, c| m.max(c.norm()));
        if peak == 0.0 {
            0.0
        } else {
            edge / peak
        }
    }
}

/// A packet together with the eigenbasis it was built from.
#[derive(Debug, Clone)]
pub struct PreparedPacket {
    pub state: WavePacketState,
    pub basis: GridEigenstates,
    /// `(n, |c_n|^2)` for every level in the superposition.
    pub weights: Vec<(usize, f64)>,
}

impl PreparedPacket {
    pub fn mean_level(&self) -> f64 {
        self.weights.iter().map(|&(n, w)| n as f64 * w).sum()
    }

    pub fn level_spread(&self) -> f64 {
        let mean = self.mean_level();
        self.weights.iter().map(|&(n, w)| w * (n as f64 - mean).powi(2)).sum::<f64>().sqrt()
    }
}

/// Gaussian superposition `sum c_n |n>` with `c_n ~ exp(-(n - n0)^2 / (4 width^2))`,
/// so that `|c_n|^2` has standard deviation `width`. Width zero selects the
/// single level nearest `n0`.
pub fn init_packet(
    potential: &dyn Potential,
    mass: f64,
    hbar: f64,
    n0: f64,
    width: f64,
    grid: &Grid,
) -> Result<PreparedPacket> {
    ensure(n0.is_finite() && n0 >= 0.0, || format!("packet centre must be >= 0, got {n0}"))?;
    ensure(width.is_finite() && width >= 0.0, || format!("packet width must be >= 0, got {width}"))?;
    let (lo, hi) = if width == 0.0 {
        let n = n0.round() as usize;
        (n, n)
    } else {
        ((n0 - 6.0 * width).floor().max(0.0) as usize, (n0 + 6.0 * width).ceil() as usize)
    };
    ensure(hi < grid.n_points / 4, || format!("level {hi} is not resolved by {} points", grid.n_points))?;
    let z = grid.positions();
    let dz = grid.dz();
    let samples: Vec<f64> = z.iter().map(|&z| potential.value(z)).collect();
    let basis = grid_eigenstates(&samples, dz, mass, hbar, hi + 1);
    let mut weights: Vec<(usize, f64)> = (lo..=hi)
        .map(|n| {
            let w = if width == 0.0 { 1.0 } else { (-(n as f64 - n0).powi(2) / (2.0 * width * width)).exp() };
            (n, w)
        })
        .collect();
    let total: f64 = weights.iter().map(|w| w.1).sum();
    for w in weights.iter_mut() {
        w.1 /= total;
    }
    let mut psi = vec![Complex64::new(0.0, 0.0); grid.n_points];
    for &(n, w) in &weights {
        let c = w.sqrt();
        for (p, phi) in psi.iter_mut().zip(&basis.states[n]) {
            p.re += c * phi;
        }
    }
    let state = WavePacketState { grid: *grid, psi, t: 0.0 };
    let edge = state.edge_amplitude(1);
    if edge > EDGE_LIMIT {
        return Err(Error::GridTooSmall { amplitude: edge, limit: EDGE_LIMIT });
    }
    Ok(PreparedPacket { state, basis, weights })
}
