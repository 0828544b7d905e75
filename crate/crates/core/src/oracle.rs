//! End-to-end check of the predicted times against a wave-packet simulation.
//!
//! Undriven runs measure the autocorrelation in the lab frame. Driven runs
//! measure it in the frame rotating with the drive, where the classical
//! period is `T0_cl Delta (1 - M_cl)`.

use std::f64::consts::PI;

use crate::drive::{CouplingShape, DriveParams};
use crate::error::{ensure, Error, Result};
use crate::mathieu::ResonanceContext;
use crate::propagate::{
    detect_times, init_packet, AutocorrelationSeries, DetectConfig, Frame, Grid, Propagator, RevivalEstimate,
    RotatingFrame, WavePacketState, LEAK_LIMIT,
};
use crate::revival::{RegimeThresholds, TimeScales};
use crate::spectra::{coupling_matrix_element, grid_eigenstates, PowerLawSystem, SpectrumModel};
use crate::time::Time;

#[derive(Debug, Clone)]
pub struct OracleSetup {
    pub system: PowerLawSystem,
    pub lambda: f64,
    pub order: u32,
    pub shape: CouplingShape,
    /// Scalar coupling `V`; `None` uses `|<r+N|V(z)|r>|` on the grid.
    pub coupling: Option<f64>,
    pub n0: f64,
    pub width: f64,
    pub n_points: usize,
    pub turning_fraction: f64,
    /// Levels above the packet kept inside the box.
    pub headroom: usize,
    /// Largest number of step halvings tried when the probe run leaks.
    pub max_halvings: u32,
    /// `None` picks half the largest step that resolves the packet and the drive.
    pub dt: Option<f64>,
    /// `None` runs to `1.2 |T_Q|`, or ten classical periods without a revival.
    pub t_end: Option<f64>,
    pub samples_per_period: usize,
    pub detect: DetectConfig,
    pub thresholds: RegimeThresholds,
}

impl OracleSetup {
    pub fn new(system: PowerLawSystem, n0: f64, width: f64) -> Self {
        OracleSetup {
            system,
            lambda: 0.0,
            order: 1,
            shape: CouplingShape::Dipole,
            coupling: None,
            n0,
            width,
            n_points: 2048,
            turning_fraction: 0.7,
            headroom: 8,
            max_halvings: 6,
            dt: None,
            t_end: None,
            samples_per_period: 40,
            detect: DetectConfig::default(),
            thresholds: RegimeThresholds::default(),
        }
    }

    pub fn with_drive(mut self, lambda: f64, order: u32) -> Self {
        self.lambda = lambda;
        self.order = order;
        self
    }
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub coupling: f64,
    pub times: TimeScales,
    /// Rotation rate of the measurement frame; zero for the lab frame.
    pub frame_frequency: f64,
    pub predicted_cl: f64,
    pub predicted_q: Time,
    pub estimate: RevivalEstimate,
    /// Signed relative errors of the measured magnitudes.
    pub classical_error: Option<f64>,
    pub revival_error: Option<f64>,
    /// Both `q < 1` and `|mu| < 0.5`.
    pub perturbative: bool,
    pub dt: f64,
    pub steps: usize,
    pub sample_every: usize,
    pub max_norm_drift: f64,
    pub energy_drift: f64,
    pub mean_level: f64,
    pub level_spread: f64,
    pub series: AutocorrelationSeries,
}

pub fn run_oracle(setup: &OracleSetup) -> Result<OracleReport> {
    let sys = &setup.system;
    ensure(setup.samples_per_period >= 4, || "need at least 4 samples per period".into())?;
    let (m, hbar) = (sys.mass, sys.hbar);
    let r = setup.n0.round() as usize;
    let top = (setup.n0 + 6.0 * setup.width).ceil() as usize + setup.headroom;
    let top = top.max(r + setup.order as usize);
    let mut grid = Grid::for_potential(sys, m, hbar, top, setup.turning_fraction, setup.n_points, 1.0)?;

    let coupling = match setup.coupling {
        Some(v) => v,
        None => resonant_coupling(sys, &grid, &setup.shape, r, setup.order)?,
    };
    let drive = DriveParams::new(setup.lambda, coupling, setup.order).with_shape(setup.shape.clone());
    let ctx = ResonanceContext::new(SpectrumModel::power_law(sys, setup.n0)?, drive.clone())?;
    let times = TimeScales::evaluate(&ctx, &setup.thresholds)?;
    let predicted_cl = times.tl_cl.abs();
    let predicted_q = match times.tl_q {
        Time::Finite(t) => Time::Finite(t.abs()),
        Time::Unbounded => Time::Unbounded,
    };

    let mut packet = init_packet(sys, m, hbar, setup.n0, setup.width, &grid)?;
    let e_top = packet.weights.iter().map(|&(n, _)| packet.basis.energies[n]).fold(0.0, f64::max);
    let t_end = setup.t_end.unwrap_or(match predicted_q {
        Time::Finite(t) => (1.2 * t).max(4.0 * predicted_cl),
        Time::Unbounded => 10.0 * predicted_cl,
    });
    let dt = match setup.dt {
        Some(dt) => dt,
        None => {
            let mut limit = 2.0 * PI * hbar / (20.0 * e_top.abs());
            if setup.lambda != 0.0 {
                limit = limit.min(2.0 * PI / 20.0);
            }
            probe_step(&grid, sys, &drive, &packet.state, 0.5 * limit, 2.0 * predicted_cl, t_end, setup.max_halvings)?
        }
    };
    grid = grid.with_dt(dt);
    packet.state.grid = grid;
    let sample_every = ((predicted_cl / setup.samples_per_period as f64 / dt).floor() as usize).max(1);

    let (frame, frame_frequency) = if setup.lambda == 0.0 {
        (Frame::Lab, 0.0)
    } else {
        let f = drive.resonance_frequency();
        (Frame::Rotating(RotatingFrame::new(&packet, f)), f)
    };
    let mut prop = Propagator::new(&grid, sys, m, hbar, &drive)?;
    let mut state = packet.state.clone();
    let e0 = prop.energy(&state);
    let series = prop.evolve_in(&mut state, t_end, sample_every, &frame)?;
    let e1 = prop.energy(&state);
    let estimate = detect_times(&series, &setup.detect)?;

    let rel = |measured: f64, predicted: f64| (measured - predicted) / predicted;
    let classical_error = estimate.classical_period.map(|t| rel(t, predicted_cl));
    let revival_error = match (estimate.revival_time, predicted_q) {
        (Some(t), Time::Finite(p)) => Some(rel(t, p)),
        _ => None,
    };
    let perturbative = !times.q.is_some_and(|q| q.abs() >= 1.0) && times.mu.abs() < 0.5;
    Ok(OracleReport {
        coupling,
        frame_frequency,
        predicted_cl,
        predicted_q,
        classical_error,
        revival_error,
        perturbative,
        dt,
        steps: (series.len().saturating_sub(1)) * sample_every,
        sample_every,
        max_norm_drift: series.max_norm_drift,
        energy_drift: ((e1 - e0) / e0).abs(),
        mean_level: packet.mean_level(),
        level_spread: packet.level_spread(),
        times,
        estimate,
        series,
    })
}

/// `|<r+N|V(z)|r>|` between grid eigenstates of the undriven well.
pub fn resonant_coupling(sys: &PowerLawSystem, grid: &Grid, shape: &CouplingShape, r: usize, order: u32) -> Result<f64> {
    let z = grid.positions();
    let samples: Vec<f64> = z.iter().map(|&z| sys.potential(z)).collect();
    let eig = grid_eigenstates(&samples, grid.dz(), sys.mass, sys.hbar, r + order as usize + 1);
    coupling_matrix_element(&eig, &z, grid.dz(), shape, r, order)
}

/// Halves `dt` until a probe run over `t_probe` leaks little enough that the
/// same rate over `t_end` stays a decade below the leak limit. Steep walls
/// need steps well below the energy resolution limit.
#[allow(clippy::too_many_arguments)]
fn probe_step(
    grid: &Grid,
    sys: &PowerLawSystem,
    drive: &DriveParams,
    state: &WavePacketState,
    mut dt: f64,
    t_probe: f64,
    t_end: f64,
    max_halvings: u32,
) -> Result<f64> {
    let t_probe = t_probe.min(t_end);
    for _ in 0..=max_halvings {
        let g = grid.with_dt(dt);
        let mut prop = Propagator::new(&g, sys, sys.mass, sys.hbar, drive)?;
        let mut probe = state.clone();
        probe.grid = g;
        prop.step(&mut probe, (t_probe / dt).ceil() as usize);
        if prop.edge_probability(&probe) * (t_end / t_probe) < 0.1 * LEAK_LIMIT {
            return Ok(dt);
        }
        dt *= 0.5;
    }
    Err(Error::Unstable { t: t_probe, reason: format!("probe run still leaks at dt = {:e}", 2.0 * dt) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_packet_recurs_without_revival_decay() {
        let sys = PowerLawSystem::new(0.5, 1.0, 2.0, 1.0, 1.0).unwrap();
        let mut setup = OracleSetup::new(sys, 10.0, 2.0);
        setup.n_points = 1024;
        let rep = run_oracle(&setup).unwrap();
        assert_eq!(rep.predicted_q, Time::Unbounded);
        let err = rep.classical_error.unwrap();
        assert!(err.abs() < 5e-3, "{err}");
        assert!(rep.estimate.classical_peaks.len() >= 8);
        assert!(rep.estimate.classical_peaks.iter().all(|p| p.height > 0.99));
        assert!(rep.max_norm_drift < 1e-10);
        assert!(rep.energy_drift < 1e-6, "{}", rep.energy_drift);
    }
}
