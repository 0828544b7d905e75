use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::drive::DriveParams;
use crate::error::{ensure, Error, Result};
use crate::spectra::Potential;

use super::{Grid, PreparedPacket, WavePacketState};

/// Largest accepted deviation of the norm from one.
pub const NORM_LIMIT: f64 = 1e-8;
/// Largest accepted probability within the outer edge bands of the grid.
pub const LEAK_LIMIT: f64 = 1e-8;

/// Sampled autocorrelation `A(t) = <psi(0)|psi(t)>`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrelationSeries {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    /// `|A|^2` at each sample.
    pub values: Vec<f64>,
    pub max_norm_drift: f64,
}

impl AutocorrelationSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Series from `|A|^2` samples alone (phases set to zero).
    pub fn from_values(times: Vec<f64>, values: Vec<f64>) -> Self {
        let amplitudes = values.iter().map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0)).collect();
        AutocorrelationSeries { times, amplitudes, values, max_norm_drift: 0.0 }
    }
}

/// Frame in which the autocorrelation is measured.
#[derive(Debug, Clone, Default)]
pub enum Frame {
    #[default]
    Lab,
    /// Frame rotating with the drive: level `n` picks up `exp(i n f t)`.
    Rotating(RotatingFrame),
}

/// Projection of the packet onto its own levels, used to measure
/// `A(t) = sum_n c_n exp(i n f t) <n|psi(t)>`.
#[derive(Debug, Clone)]
pub struct RotatingFrame {
    pub frequency: f64,
    levels: Vec<(usize, f64, Vec<f64>)>,
}

impl RotatingFrame {
    /// Frame for `packet` rotating at `frequency` (the drive's `1/N`).
    pub fn new(packet: &PreparedPacket, frequency: f64) -> Self {
        let levels = packet.weights.iter().map(|&(n, w)| (n, w.sqrt(), packet.basis.states[n].clone())).collect();
        RotatingFrame { frequency, levels }
    }

    fn overlap(&self, state: &WavePacketState) -> Complex64 {
        let dz = state.grid.dz();
        self.levels
            .iter()
            .map(|(n, c, phi)| {
                let proj: Complex64 = phi.iter().zip(&state.psi).map(|(p, s)| s * p).sum::<Complex64>() * dz;
                Complex64::from_polar(*c, *n as f64 * self.frequency * state.t) * proj
            })
            .sum()
    }
}

/// Split-operator stepper for one grid, potential and drive.
pub struct Propagator {
    grid: Grid,
    hbar: f64,
    potential: Vec<f64>,
    coupling: Vec<f64>,
    lambda: f64,
    kinetic: Vec<f64>,
    kin_half: Vec<Complex64>,
    kin_full: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Propagator {
    pub fn new(grid: &Grid, potential: &dyn Potential, mass: f64, hbar: f64, drive: &DriveParams) -> Result<Self> {
        ensure(mass > 0.0 && hbar > 0.0, || "mass and hbar must be > 0".into())?;
        drive.validate()?;
        let z = grid.positions();
        let potential: Vec<f64> = z.iter().map(|&z| potential.value(z)).collect();
        let coupling: Vec<f64> = z.iter().map(|&z| drive.shape.eval(z)).collect();
        // Symbol of the three-point Laplacian, so the grid eigenstates used for
        // the packet are stationary under the propagator.
        let dz = grid.dz();
        let kinetic: Vec<f64> =
            grid.wavenumbers().iter().map(|k| hbar * hbar * (1.0 - (k * dz).cos()) / (mass * dz * dz)).collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n_points);
        let inverse = planner.plan_fft_inverse(grid.n_points);
        let scratch = vec![Complex64::new(0.0, 0.0); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];
        let mut prop = Propagator {
            grid: *grid,
            hbar,
            potential,
            coupling,
            lambda: drive.lambda,
            kinetic,
            kin_half: Vec::new(),
            kin_full: Vec::new(),
            forward,
            inverse,
            scratch,
        };
        prop.set_dt(grid.dt);
        Ok(prop)
    }

    /// Changes the time step; a negative step runs the evolution backwards.
    pub fn set_dt(&mut self, dt: f64) {
        self.grid.dt = dt;
        let norm = 1.0 / self.grid.n_points as f64;
        let factor = |tau: f64| -> Vec<Complex64> {
            self.kinetic.iter().map(|t| Complex64::from_polar(norm, -t * tau / self.hbar)).collect()
        };
        self.kin_half = factor(0.5 * dt);
        self.kin_full = factor(dt);
    }

    pub fn dt(&self) -> f64 {
        self.grid.dt
    }

    fn kinetic_step(&mut self, psi: &mut [Complex64], full: bool) {
        self.forward.process_with_scratch(psi, &mut self.scratch);
        let factors = if full { &self.kin_full } else { &self.kin_half };
        for (p, f) in psi.iter_mut().zip(factors) {
            *p *= f;
        }
        self.inverse.process_with_scratch(psi, &mut self.scratch);
    }

    fn potential_step(&self, psi: &mut [Complex64], t_mid: f64) {
        let dt = self.grid.dt;
        let drive = self.lambda * t_mid.sin();
        for ((p, v), c) in psi.iter_mut().zip(&self.potential).zip(&self.coupling) {
            *p *= Complex64::from_polar(1.0, -(v + drive * c) * dt / self.hbar);
        }
    }

    /// Advances `state` by `steps` steps. Half kinetic factors between
    /// consecutive steps are merged.
    pub fn step(&mut self, state: &mut WavePacketState, steps: usize) {
        if steps == 0 {
            return;
        }
        let dt = self.grid.dt;
        let mut psi = std::mem::take(&mut state.psi);
        self.kinetic_step(&mut psi, false);
        for i in 0..steps {
            self.potential_step(&mut psi, state.t + (i as f64 + 0.5) * dt);
            self.kinetic_step(&mut psi, i + 1 < steps);
        }
        state.psi = psi;
        state.t += steps as f64 * dt;
    }

    /// Expectation value of the undriven Hamiltonian.
    pub fn energy(&mut self, state: &WavePacketState) -> f64 {
        self.energy_moments(state).0
    }

    /// Mean and standard deviation of the undriven Hamiltonian in `state`.
    pub fn energy_moments(&mut self, state: &WavePacketState) -> (f64, f64) {
        let dz = self.grid.dz();
        let mut h = state.psi.clone();
        self.forward.process_with_scratch(&mut h, &mut self.scratch);
        let n = self.grid.n_points as f64;
        for (c, t) in h.iter_mut().zip(&self.kinetic) {
            *c *= t / n;
        }
        self.inverse.process_with_scratch(&mut h, &mut self.scratch);
        for ((c, p), v) in h.iter_mut().zip(&state.psi).zip(&self.potential) {
            *c += p * v;
        }
        let norm = state.norm();
        let mean = state.psi.iter().zip(&h).map(|(p, c)| (p.conj() * c).re).sum::<f64>() * dz / norm;
        let second = h.iter().map(|c| c.norm_sqr()).sum::<f64>() * dz / norm;
        (mean, (second - mean * mean).max(0.0).sqrt())
    }

    /// Probability within the outer 1/32 of the grid on each side.
    pub fn edge_probability(&self, state: &WavePacketState) -> f64 {
        let n = state.psi.len();
        let band = n / 32;
        let p: f64 = state.psi[..band].iter().chain(&state.psi[n - band..]).map(|c| c.norm_sqr()).sum();
        p * self.grid.dz()
    }

    /// Largest energy the packet meaningfully populates, `<H> + 6 sigma`.
    pub fn top_energy(&mut self, state: &WavePacketState) -> f64 {
        let (mean, sigma) = self.energy_moments(state);
        mean.abs() + 6.0 * sigma
    }

    /// Evolves to `t_end`, sampling the lab-frame autocorrelation every
    /// `sample_every` steps. The state finishes at the last sample time.
    pub fn evolve(&mut self, state: &mut WavePacketState, t_end: f64, sample_every: usize) -> Result<AutocorrelationSeries> {
        self.evolve_in(state, t_end, sample_every, &Frame::Lab)
    }

    /// As [`Propagator::evolve`], measuring the autocorrelation in `frame`.
    pub fn evolve_in(
        &mut self,
        state: &mut WavePacketState,
        t_end: f64,
        sample_every: usize,
        frame: &Frame,
    ) -> Result<AutocorrelationSeries> {
        ensure(sample_every >= 1, || "sample interval must be >= 1 step".into())?;
        let dt = self.grid.dt;
        let span = t_end - state.t;
        ensure(span.is_finite() && (span == 0.0 || span.signum() == dt.signum()), || {
            format!("cannot reach t = {t_end} from t = {} with dt = {dt}", state.t)
        })?;
        ensure(self.lambda == 0.0 || dt.abs() <= 2.0 * PI / 20.0, || {
            format!("dt = {dt} does not resolve the drive period")
        })?;
        let top = self.top_energy(state);
        ensure(dt.abs() * top <= 2.0 * PI * self.hbar / 20.0, || {
            format!("dt = {dt} does not resolve the packet energies up to {top}")
        })?;
        let n_samples = ((span / dt).round() as usize) / sample_every;
        let reference = state.clone();
        let mut series = AutocorrelationSeries {
            times: Vec::with_capacity(n_samples + 1),
            amplitudes: Vec::with_capacity(n_samples + 1),
            values: Vec::with_capacity(n_samples + 1),
            max_norm_drift: 0.0,
        };
        let norm0 = reference.norm();
        ensure(norm0 > 0.0, || "cannot evolve an empty state".into())?;
        let overlap = |state: &WavePacketState| match frame {
            Frame::Lab => reference.overlap(state),
            Frame::Rotating(f) => f.overlap(state),
        };
        // Scaled so that A(0) = 1 exactly.
        let a0 = overlap(state);
        ensure(a0.norm() > 0.0, || "initial state is orthogonal to the reference".into())?;
        let record = |state: &WavePacketState, series: &mut AutocorrelationSeries| -> Result<()> {
            let a = if series.is_empty() { Complex64::new(1.0, 0.0) } else { overlap(state) / a0 };
            let drift = (state.norm() / norm0 - 1.0).abs();
            series.max_norm_drift = series.max_norm_drift.max(drift);
            if drift > NORM_LIMIT || !drift.is_finite() {
                return Err(Error::Unstable { t: state.t, reason: format!("norm drifted by {drift:e}") });
            }
            series.times.push(state.t);
            series.amplitudes.push(a);
            series.values.push(a.norm_sqr().min(1.0));
            Ok(())
        };
        record(state, &mut series)?;
        for _ in 0..n_samples {
            self.step(state, sample_every);
            record(state, &mut series)?;
            let leak = self.edge_probability(state);
            if leak > LEAK_LIMIT {
                return Err(Error::Unstable { t: state.t, reason: format!("probability {leak:e} reached the grid edge") });
            }
        }
        Ok(series)
    }
}

/// Evolves `state` under `H0 + lambda V(z) sin t` up to `t_end`.
pub fn evolve(
    state: &mut WavePacketState,
    potential: &dyn Potential,
    mass: f64,
    hbar: f64,
    drive: &DriveParams,
    t_end: f64,
    sample_every: usize,
) -> Result<AutocorrelationSeries> {
    Propagator::new(&state.grid, potential, mass, hbar, drive)?.evolve(state, t_end, sample_every)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagate::init_packet;
    use crate::spectra::PowerLawSystem;

    fn oscillator() -> (PowerLawSystem, Grid) {
        let sys = PowerLawSystem::new(0.5, 1.0, 2.0, 1.0, 1.0).unwrap();
        let grid = Grid::for_potential(&sys, 1.0, 1.0, 24, 0.7, 1024, 2e-3).unwrap();
        (sys, grid)
    }

    #[test]
    fn stationary_state_keeps_unit_autocorrelation() {
        let (sys, grid) = oscillator();
        let mut p = init_packet(&sys, 1.0, 1.0, 3.0, 0.0, &grid).unwrap();
        let s = evolve(&mut p.state, &sys, 1.0, 1.0, &DriveParams::undriven(), 5.0, 50).unwrap();
        for v in &s.values {
            assert!((v - 1.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn oscillator_packet_recurs_each_period() {
        let (sys, grid) = oscillator();
        let mut p = init_packet(&sys, 1.0, 1.0, 10.0, 2.0, &grid).unwrap();
        let period = 2.0 * PI;
        let steps = (period / grid.dt).round() as usize;
        let grid = grid.with_dt(period / steps as f64);
        p.state.grid = grid;
        let mut prop = Propagator::new(&grid, &sys, 1.0, 1.0, &DriveParams::undriven()).unwrap();
        let s = prop.evolve(&mut p.state, 2.0 * period, steps).unwrap();
        assert_eq!(s.len(), 3);
        // Finite-difference levels are not exactly equally spaced; the
        // recurrence is exact to the dispersion of the grid spectrum.
        assert!((s.values[1] - 1.0).abs() < 1e-4, "{}", s.values[1]);
        assert!((s.values[2] - 1.0).abs() < 1e-3, "{}", s.values[2]);
        assert!(s.values[0] == 1.0);
    }

    #[test]
    fn rotating_frame_shifts_the_recurrence() {
        let (sys, grid) = oscillator();
        let p = init_packet(&sys, 1.0, 1.0, 10.0, 2.0, &grid).unwrap();
        let period = 4.0 * PI;
        let steps = (0.5 * period / grid.dt).round() as usize;
        let grid = grid.with_dt(0.5 * period / steps as f64);
        let mut state = p.state.clone();
        state.grid = grid;
        let frame = Frame::Rotating(RotatingFrame::new(&p, 0.5));
        let mut prop = Propagator::new(&grid, &sys, 1.0, 1.0, &DriveParams::undriven()).unwrap();
        let s = prop.evolve_in(&mut state, period, steps, &frame).unwrap();
        assert_eq!(s.values[0], 1.0);
        assert!(s.values[1] < 1e-3, "{}", s.values[1]);
        assert!((s.values[2] - 1.0).abs() < 1e-3, "{}", s.values[2]);
    }

    #[test]
    fn energy_spread_vanishes_for_an_eigenstate() {
        let (sys, grid) = oscillator();
        let p = init_packet(&sys, 1.0, 1.0, 5.0, 0.0, &grid).unwrap();
        let mut prop = Propagator::new(&grid, &sys, 1.0, 1.0, &DriveParams::undriven()).unwrap();
        let (mean, sigma) = prop.energy_moments(&p.state);
        assert!((mean - p.basis.energies[5]).abs() < 1e-9 * mean);
        assert!(sigma < 1e-6 * mean, "{sigma}");
        let q = init_packet(&sys, 1.0, 1.0, 10.0, 2.0, &grid).unwrap();
        let (_, sigma) = prop.energy_moments(&q.state);
        assert!((sigma - 2.0).abs() < 0.05, "{sigma}");
    }

    #[test]
    fn reversed_evolution_returns_to_the_start() {
        let (sys, grid) = oscillator();
        let p = init_packet(&sys, 1.0, 1.0, 10.0, 2.0, &grid).unwrap();
        let mut state = p.state.clone();
        let drive = DriveParams::new(0.05, 1.0, 1);
        let mut prop = Propagator::new(&grid, &sys, 1.0, 1.0, &drive).unwrap();
        prop.step(&mut state, 2000);
        prop.set_dt(-grid.dt);
        prop.step(&mut state, 2000);
        let fidelity = p.state.overlap(&state).norm_sqr();
        assert!(fidelity > 1.0 - 1e-10, "{fidelity}");
        assert!(state.t.abs() < 1e-9);
    }

    #[test]
    fn coarse_time_step_is_rejected() {
        let (sys, grid) = oscillator();
        let mut p = init_packet(&sys, 1.0, 1.0, 10.0, 2.0, &grid).unwrap();
        let grid = grid.with_dt(0.5);
        p.state.grid = grid;
        assert!(evolve(&mut p.state, &sys, 1.0, 1.0, &DriveParams::undriven(), 5.0, 1).is_err());
    }
}
