//! Finite-difference spectra of one-dimensional wells.

use std::f64::consts::PI;

use crate::drive::CouplingShape;
use crate::error::{ensure, Error, Result};
use crate::tridiag::SymTridiagonal;

use super::PowerLawSystem;

/// A symmetric confining well.
pub trait Potential: Send + Sync {
    fn value(&self, z: f64) -> f64;

    /// Half-width of an infinite square enclosure, if the well has one.
    fn walls(&self) -> Option<f64> {
        None
    }
}

impl Potential for PowerLawSystem {
    fn value(&self, z: f64) -> f64 {
        self.potential(z)
    }
}

/// Flat-bottomed infinite well on `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareWell {
    pub half_width: f64,
}

impl Potential for SquareWell {
    fn value(&self, _z: f64) -> f64 {
        0.0
    }

    fn walls(&self) -> Option<f64> {
        Some(self.half_width)
    }
}

/// Wraps a closure as a smooth symmetric well.
pub struct FnPotential<F>(pub F);

impl<F: Fn(f64) -> f64 + Send + Sync> Potential for FnPotential<F> {
    fn value(&self, z: f64) -> f64 {
        (self.0)(z)
    }
}

/// Positive classical turning point `z > 0` with `V(z) = energy`.
pub fn turning_point(potential: &dyn Potential, energy: f64) -> Result<f64> {
    let v0 = potential.value(0.0);
    if energy <= v0 {
        return Err(Error::Domain(format!("energy {energy} lies below the well bottom {v0}")));
    }
    if let Some(w) = potential.walls() {
        if potential.value(w) <= energy {
            return Ok(w);
        }
    }
    let mut hi = 1.0;
    let mut expansions = 0;
    while potential.value(hi) < energy {
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::Domain("potential does not confine at this energy".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if potential.value(mid) < energy {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Phase-space area `oint p dz` enclosed at energy `energy`.
fn action(potential: &dyn Potential, mass: f64, energy: f64) -> Result<f64> {
    let zt = turning_point(potential, energy)?;
    // z = zt sin(theta) removes the square-root singularity at the turning point.
    let integrand = |theta: f64| {
        let z = zt * theta.sin();
        let kinetic = (energy - potential.value(z)).max(0.0);
        (2.0 * mass * kinetic).sqrt() * zt * theta.cos()
    };
    let scale = (2.0 * mass * (energy - potential.value(0.0))).sqrt() * zt;
    Ok(4.0 * adaptive_simpson(&integrand, 0.0, 0.5 * PI, 1e-14 * scale))
}

/// Bohr-Sommerfeld energy of level `n`: the action equals `2 pi hbar (n + 1/2)`,
/// or `2 pi hbar (n + 1)` when the well is closed by hard walls.
pub fn wkb_energy(potential: &dyn Potential, mass: f64, hbar: f64, n: f64) -> Result<f64> {
    ensure(mass > 0.0 && hbar > 0.0, || "mass and hbar must be > 0".into())?;
    ensure(n >= 0.0 && n.is_finite(), || format!("level index must be >= 0, got {n}"))?;
    let maslov = if potential.walls().is_some() { 1.0 } else { 0.5 };
    let target = 2.0 * PI * hbar * (n + maslov);
    let bottom = potential.value(0.0);
    let mut lo = bottom;
    let mut width = 1.0_f64.max(bottom.abs());
    let mut hi = bottom + width;
    while action(potential, mass, hi)? < target {
        lo = hi;
        width *= 2.0;
        hi = bottom + width;
        if !hi.is_finite() {
            return Err(Error::Domain("no energy reaches the requested action".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if action(potential, mass, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Second-order finite-difference Hamiltonian with Dirichlet ends.
pub fn fd_hamiltonian(samples: &[f64], dz: f64, mass: f64, hbar: f64) -> SymTridiagonal {
    let t = hbar * hbar / (2.0 * mass * dz * dz);
    let diag = samples.iter().map(|v| 2.0 * t + v).collect();
    let off = vec![-t; samples.len().saturating_sub(1)];
    SymTridiagonal::new(diag, off)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericSpectrumConfig {
    /// Interior points of the coarsest grid; `None` picks
    /// `max(min_points, points_per_level * n_levels)`.
    pub points: Option<usize>,
    pub points_per_level: usize,
    pub min_points: usize,
    /// Position of the top level's turning point as a fraction of the half-box.
    pub turning_fraction: f64,
    /// Largest relative change of any level between successive refinements.
    pub tolerance: f64,
}

impl Default for NumericSpectrumConfig {
    fn default() -> Self {
        NumericSpectrumConfig {
            points: None,
            points_per_level: 100,
            min_points: 1024,
            turning_fraction: 0.7,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericSpectrum {
    /// Extrapolated energies of levels `0..n_levels`.
    pub energies: Vec<f64>,
    pub half_width: f64,
    pub base_points: usize,
    /// Change of each level between the two extrapolations.
    pub refinement_shift: Vec<f64>,
}

/// Half-width of the box that holds `n_levels` bound states.
pub fn box_half_width(
    potential: &dyn Potential,
    mass: f64,
    hbar: f64,
    n_levels: usize,
    turning_fraction: f64,
) -> Result<f64> {
    if let Some(w) = potential.walls() {
        return Ok(w);
    }
    ensure(turning_fraction > 0.0 && turning_fraction < 1.0, || {
        format!("turning fraction must lie in (0, 1), got {turning_fraction}")
    })?;
    let e_top = wkb_energy(potential, mass, hbar, n_levels.saturating_sub(1) as f64)?;
    Ok(turning_point(potential, e_top)? / turning_fraction)
}

fn box_levels(
    potential: &dyn Potential,
    half_width: f64,
    interior: usize,
    mass: f64,
    hbar: f64,
    n_levels: usize,
) -> Vec<f64> {
    let dz = 2.0 * half_width / (interior + 1) as f64;
    let samples: Vec<f64> =
        (0..interior).map(|j| potential.value(-half_width + (j + 1) as f64 * dz)).collect();
    fd_hamiltonian(&samples, dz, mass, hbar).lowest_eigenvalues(n_levels)
}

/// Lowest `n_levels` energies from finite differences on three nested grids,
/// combined by Richardson extrapolation.
pub fn numeric_spectrum(
    potential: &dyn Potential,
    mass: f64,
    hbar: f64,
    n_levels: usize,
    config: &NumericSpectrumConfig,
) -> Result<NumericSpectrum> {
    ensure(n_levels >= 1, || "at least one level is required".into())?;
    ensure(mass > 0.0 && hbar > 0.0, || "mass and hbar must be > 0".into())?;
    let half_width = box_half_width(potential, mass, hbar, n_levels, config.turning_fraction)?;
    let base = config
        .points
        .unwrap_or_else(|| config.min_points.max(config.points_per_level * n_levels));
    ensure(base > n_levels, || format!("{base} grid points cannot hold {n_levels} levels"))?;
    let grids: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            let interior = (base + 1) * (1 << i) - 1;
            box_levels(potential, half_width, interior, mass, hbar, n_levels)
        })
        .collect();
    let rich = |c: &[f64], f: &[f64]| -> Vec<f64> {
        c.iter().zip(f).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
    };
    let r1 = rich(&grids[0], &grids[1]);
    let r2 = rich(&grids[1], &grids[2]);
    let mut shifts = Vec::with_capacity(n_levels);
    for (level, (a, b)) in r1.iter().zip(&r2).enumerate() {
        let shift = (a - b).abs();
        if shift > config.tolerance * b.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::SpectrumNotConverged { level, shift });
        }
        shifts.push(shift);
    }
    Ok(NumericSpectrum { energies: r2, half_width, base_points: base, refinement_shift: shifts })
}

/// Eigenpairs of the finite-difference Hamiltonian on a given grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridEigenstates {
    pub energies: Vec<f64>,
    /// Real eigenfunctions normalized to `sum |phi|^2 dz = 1`.
    pub states: Vec<Vec<f64>>,
}

/// Lowest `count` eigenstates for potential samples on a uniform grid.
///
/// Each state is signed so that its right-most significant lobe is positive,
/// which makes the basis reproducible across grids.
pub fn grid_eigenstates(samples: &[f64], dz: f64, mass: f64, hbar: f64, count: usize) -> GridEigenstates {
    let h = fd_hamiltonian(samples, dz, mass, hbar);
    let energies = h.lowest_eigenvalues(count);
    let norm = dz.sqrt();
    let states = energies
        .iter()
        .map(|&e| {
            let mut v = h.eigenvector(e);
            let big = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let sign = v
                .iter()
                .rev()
                .find(|x| x.abs() > 1e-3 * big)
                .map_or(1.0, |x| x.signum());
            for x in v.iter_mut() {
                *x *= sign / norm;
            }
            v
        })
        .collect();
    GridEigenstates { energies, states }
}

/// Matrix element `|<r + N| V(z) |r>|` of the drive profile between grid eigenstates.
pub fn coupling_matrix_element(
    eig: &GridEigenstates,
    positions: &[f64],
    dz: f64,
    shape: &CouplingShape,
    r: usize,
    order: u32,
) -> Result<f64> {
    let upper = r + order as usize;
    ensure(upper < eig.states.len(), || {
        format!("level {upper} is not among the {} computed states", eig.states.len())
    })?;
    let (a, b) = (&eig.states[r], &eig.states[upper]);
    let sum: f64 = positions
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&z, (x, y))| x * shape.eval(z) * y)
        .sum();
    Ok((sum * dz).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::powerlaw_energy;

    #[test]
    fn harmonic_oscillator_levels() {
        let ho = PowerLawSystem::new(0.5, 1.0, 2.0, 1.0, 1.0).unwrap();
        let levels = numeric_spectrum(&ho, 1.0, 1.0, 21, &NumericSpectrumConfig::default()).unwrap();
        for (n, e) in levels.energies.iter().enumerate() {
            assert!((e - (n as f64 + 0.5)).abs() < 1e-6, "n={n}: {e}");
        }
    }

    #[test]
    fn square_well_levels() {
        let well = SquareWell { half_width: 1.0 };
        let levels = numeric_spectrum(&well, 1.0, 1.0, 10, &NumericSpectrumConfig::default()).unwrap();
        for (n, e) in levels.energies.iter().enumerate() {
            let exact = ((n + 1) as f64 * PI / 2.0).powi(2) / 2.0;
            assert!((e / exact - 1.0).abs() < 1e-9, "n={n}: {e} vs {exact}");
        }
    }

    #[test]
    fn wkb_reproduces_the_closed_form_power_law() {
        for k in [1.0, 1.5, 3.0, 4.0, 10.0] {
            let sys = PowerLawSystem::new(2.0, 0.7, k, 1.3, 0.9).unwrap();
            for n in [0.0, 3.0, 12.5] {
                let wkb = wkb_energy(&sys, sys.mass, sys.hbar, n).unwrap();
                let closed = powerlaw_energy(&sys, n).unwrap();
                assert!((wkb / closed - 1.0).abs() < 1e-10, "k={k} n={n}: {wkb} vs {closed}");
            }
        }
    }

    #[test]
    fn wkb_hard_walls_give_exact_square_well() {
        let well = SquareWell { half_width: 0.5 };
        let e = wkb_energy(&well, 1.0, 1.0, 2.0).unwrap();
        assert!((e - (3.0 * PI).powi(2) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn turning_point_of_quartic() {
        let sys = PowerLawSystem::new(1.0, 1.0, 4.0, 1.0, 1.0).unwrap();
        assert!((turning_point(&sys, 16.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(turning_point(&sys, -1.0).is_err());
    }

    #[test]
    fn eigenstates_are_orthonormal_with_fixed_sign() {
        let n = 512;
        let l = 8.0;
        let dz = 2.0 * l / (n + 1) as f64;
        let z: Vec<f64> = (0..n).map(|j| -l + (j + 1) as f64 * dz).collect();
        let v: Vec<f64> = z.iter().map(|z| 0.5 * z * z).collect();
        let eig = grid_eigenstates(&v, dz, 1.0, 1.0, 4);
        for i in 0..4 {
            for j in 0..4 {
                let s: f64 = eig.states[i].iter().zip(&eig.states[j]).map(|(a, b)| a * b).sum::<f64>() * dz;
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-9, "<{i}|{j}> = {s}");
            }
        }
        // <1|z|0> = 1/sqrt(2) for the unit oscillator.
        let x = coupling_matrix_element(&eig, &z, dz, &CouplingShape::Dipole, 0, 1).unwrap();
        assert!((x - 0.5_f64.sqrt()).abs() < 1e-3, "{x}");
        assert!(eig.states[0][n / 2] > 0.0);
    }

    #[test]
    fn too_coarse_grid_fails_to_converge() {
        let sys = PowerLawSystem::new(1.0, 1.0, 4.0, 1.0, 1.0).unwrap();
        let cfg = NumericSpectrumConfig { points: Some(24), tolerance: 1e-12, ..Default::default() };
        assert!(matches!(
            numeric_spectrum(&sys, 1.0, 1.0, 20, &cfg),
            Err(Error::SpectrumNotConverged { .. })
        ));
    }
}
