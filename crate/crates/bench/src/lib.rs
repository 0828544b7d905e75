//! Shared fixtures for the benchmarks.

use revivals_core::mathieu::ResonanceContext;
use revivals_core::propagate::{init_packet, Grid, Propagator, WavePacketState};
use revivals_core::spectra::{PowerLawSystem, SpectrumModel};
use revivals_core::DriveParams;

/// Quartic well whose level 20 sits at the first-order resonance.
pub fn quartic() -> PowerLawSystem {
    PowerLawSystem::new(61643.076, 1.0, 4.0, 2000.0, 1.0).expect("valid system")
}

pub fn driven_context(lambda: f64) -> ResonanceContext {
    let sys = quartic();
    let spectrum = SpectrumModel::power_law(&sys, 20.0).expect("spectrum");
    ResonanceContext::new(spectrum, DriveParams::new(lambda, 0.064, 1)).expect("context")
}

/// Driven propagator and a width-1 packet around level 20 on `n_points`.
pub fn propagation(n_points: usize) -> (Propagator, WavePacketState) {
    let sys = quartic();
    let grid = Grid::for_potential(&sys, sys.mass, sys.hbar, 34, 0.7, n_points, 5e-3).expect("grid");
    let packet = init_packet(&sys, sys.mass, sys.hbar, 20.0, 1.0, &grid).expect("packet");
    let drive = DriveParams::new(0.05, 0.064, 1);
    let prop = Propagator::new(&grid, &sys, sys.mass, sys.hbar, &drive).expect("propagator");
    (prop, packet.state)
}

/// `|A(t)|^2` of a packet in a quadratic spectrum sampled over one revival.
pub fn synthetic_series(samples: usize) -> (Vec<f64>, Vec<f64>) {
    let (omega, zeta) = (2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI / 15.0);
    let t_end = 18.0;
    let times: Vec<f64> = (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect();
    let values = times
        .iter()
        .map(|&t| {
            let (mut re, mut im, mut norm) = (0.0, 0.0, 0.0);
            for k in -8i32..=8 {
                let w = (-(k * k) as f64 / 4.0).exp();
                let phase = omega * k as f64 * t + 0.5 * zeta * (k * k) as f64 * t;
                re += w * phase.cos();
                im -= w * phase.sin();
                norm += w;
            }
            (re * re + im * im) / (norm * norm)
        })
        .collect();
    (times, values)
}
