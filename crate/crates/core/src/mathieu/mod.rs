//! Characteristic values of the Mathieu equation `y'' + (a - 2q cos 2z) y = 0`.
//!
//! For an order `nu` the characteristic value `a(nu, q)` is the eigenvalue of
//! the symmetric tridiagonal operator acting on the Fourier coefficients of
//! `sum c_n exp(i(nu + 2n)z)`,
//!
//! ```text
//! a c_n = (nu + 2n)^2 c_n + q (c_{n-1} + c_{n+1}),
//! ```
//!
//! selected as the branch that equals `nu^2` at `q = 0`. Eigenvalues keep
//! their rank as `q` varies, so the branch is the one with the rank of `nu^2`.
//! Two independent backends are available: a truncated matrix with an
//! adaptive cutoff and a continued-fraction root bracketed by a Sturm count.
//!
//! At integer order the symmetric and antisymmetric solutions decouple and
//! their characteristic values (`a_m` and `b_m`) differ; [`Branch`] picks one.

mod contfrac;
mod matrix;
mod recurrence;
mod resonance;

pub use resonance::{QuasiEnergyLevel, ResonanceContext};

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use recurrence::Recurrence;

/// Solution family at integer order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    /// Even (cosine type) solutions, characteristic values `a_m`.
    #[default]
    Even,
    /// Odd (sine type) solutions, characteristic values `b_m`.
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Matrix,
    ContinuedFraction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MathieuSolver {
    pub branch: Branch,
    pub backend: Backend,
    /// Starting number of coefficients kept beyond the target on each side.
    pub initial_cutoff: usize,
    pub max_cutoff: usize,
    /// Relative change between successive cutoffs accepted as converged.
    pub tolerance: f64,
    pub max_order: f64,
    pub max_q: f64,
}

impl Default for MathieuSolver {
    fn default() -> Self {
        MathieuSolver {
            branch: Branch::Even,
            backend: Backend::Matrix,
            initial_cutoff: 20,
            max_cutoff: 4096,
            tolerance: 1e-12,
            max_order: 200.0,
            max_q: 1e4,
        }
    }
}

/// Characteristic value together with its normalized Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MathieuSolution {
    pub nu: f64,
    pub q: f64,
    pub a: f64,
    /// `c_n` of `exp(i(|nu| + 2n)z)`, unit sum of squares, `c_0 > 0` where it
    /// does not vanish.
    pub coefficients: BTreeMap<i64, f64>,
    pub cutoff: usize,
}

impl MathieuSolver {
    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    fn check(&self, nu: f64, q: f64) -> Result<()> {
        if !nu.is_finite() || nu.abs() > self.max_order {
            return Err(Error::Domain(format!("order {nu} outside |nu| <= {}", self.max_order)));
        }
        if !q.is_finite() || q.abs() > self.max_q {
            return Err(Error::Domain(format!("q = {q} outside |q| <= {}", self.max_q)));
        }
        Ok(())
    }

    /// `a(nu, q)`.
    pub fn characteristic_value(&self, nu: f64, q: f64) -> Result<f64> {
        self.check(nu, q)?;
        let rec = Recurrence::new(nu, self.branch)?;
        if q == 0.0 {
            return Ok(nu * nu);
        }
        match self.backend {
            Backend::Matrix => self.converged(&rec, q).map(|(t, _)| t.eigenvalue()),
            Backend::ContinuedFraction => contfrac::characteristic_value(&rec, q),
        }
    }

    /// Characteristic value at a fixed cutoff, without the convergence loop.
    pub fn characteristic_value_at_cutoff(&self, nu: f64, q: f64, cutoff: usize) -> Result<f64> {
        self.check(nu, q)?;
        let rec = Recurrence::new(nu, self.branch)?;
        Ok(matrix::Truncation::new(&rec, q, cutoff as i64).eigenvalue())
    }

    fn converged(&self, rec: &Recurrence, q: f64) -> Result<(matrix::Truncation, usize)> {
        let mut cutoff = self.initial_cutoff.max(1);
        let mut a = matrix::Truncation::new(rec, q, cutoff as i64).eigenvalue();
        loop {
            let next_cutoff = 2 * cutoff;
            if next_cutoff > self.max_cutoff {
                return Err(Error::NonConvergence { cutoff, last: a, previous: a });
            }
            let next = matrix::Truncation::new(rec, q, next_cutoff as i64);
            let b = next.eigenvalue();
            if (b - a).abs() <= self.tolerance * b.abs().max(1.0) {
                return Ok((next, next_cutoff));
            }
            cutoff = next_cutoff;
            a = b;
        }
    }

    /// Characteristic value and Fourier coefficients.
    pub fn solve(&self, nu: f64, q: f64) -> Result<MathieuSolution> {
        self.check(nu, q)?;
        let rec = Recurrence::new(nu, self.branch)?;
        let (trunc, cutoff) = if q == 0.0 {
            (matrix::Truncation::new(&rec, q, self.initial_cutoff as i64), self.initial_cutoff)
        } else {
            self.converged(&rec, q)?
        };
        let a = if q == 0.0 { nu * nu } else { trunc.eigenvalue() };
        let v = if q == 0.0 {
            let mut v = vec![0.0; trunc.matrix.len()];
            v[(rec.target() - trunc.lo) as usize] = 1.0;
            v
        } else {
            trunc.matrix.eigenvector(a)
        };
        let mut coefficients = rec.to_two_sided(trunc.lo, &v);
        let big = coefficients.values().fold(0.0_f64, |m, c| m.max(c.abs()));
        let c0 = coefficients.get(&0).copied().unwrap_or(0.0);
        let pivot = if c0.abs() > 1e-8 * big {
            c0
        } else {
            coefficients.values().copied().fold(0.0, |m: f64, c| if c.abs() > m.abs() { c } else { m })
        };
        if pivot < 0.0 {
            for c in coefficients.values_mut() {
                *c = -*c;
            }
        }
        Ok(MathieuSolution { nu, q, a, coefficients, cutoff })
    }
}

/// `a(nu, q)` with the default solver (even branch at integer order).
pub fn characteristic_value(nu: f64, q: f64) -> Result<f64> {
    MathieuSolver::default().characteristic_value(nu, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cf() -> MathieuSolver {
        MathieuSolver::default().with_backend(Backend::ContinuedFraction)
    }

    #[test]
    fn integer_order_reference_values() {
        // a_0, a_1, a_2 and b_1, b_2 at q = 1 from an independent Mathieu library.
        let even = MathieuSolver::default();
        let odd = MathieuSolver::default().with_branch(Branch::Odd);
        let cases = [
            (even, 0.0, -0.455_138_604_107_413_6),
            (even, 1.0, 1.859_108_072_514_363_4),
            (even, 2.0, 4.371_300_982_735_086),
            (odd, 1.0, -0.110_248_816_992_095_2),
            (odd, 2.0, 3.917_024_772_998_471),
        ];
        for (solver, nu, expect) in cases {
            let a = solver.characteristic_value(nu, 1.0).unwrap();
            assert!((a - expect).abs() < 1e-9, "nu={nu}: {a} vs {expect}");
            let b = solver.with_backend(Backend::ContinuedFraction).characteristic_value(nu, 1.0).unwrap();
            assert!((b - expect).abs() < 1e-9, "cf nu={nu}: {b} vs {expect}");
        }
    }

    #[test]
    fn small_q_series_at_order_zero() {
        let q: f64 = 0.01;
        let series = -q * q / 2.0 + 7.0 * q.powi(4) / 128.0;
        let a = characteristic_value(0.0, q).unwrap();
        assert!((a - series).abs() < 1e-13, "{a} vs {series}");
    }

    #[test]
    fn small_q_series_at_fractional_order() {
        let q: f64 = 0.02;
        for nu in [0.3_f64, 1.5, 2.7, 7.25] {
            let n2 = nu * nu;
            let series = n2
                + q * q / (2.0 * (n2 - 1.0))
                + (5.0 * n2 + 7.0) * q.powi(4) / (32.0 * (n2 - 1.0).powi(3) * (n2 - 4.0));
            let a = characteristic_value(nu, q).unwrap();
            assert!((a - series).abs() < 1e-11, "nu={nu}: {a} vs {series}");
        }
    }

    #[test]
    fn near_integer_order_keeps_its_rank() {
        // Reference eigenvalues of a dense two-sided Hill matrix. In the first case
        // nu^2 and (nu - 8)^2 nearly coincide; in the second the neighbours are close at large q.
        let cases = [
            (3.997_905_088_951_294_6, 1.742_528_323_965_813, 16.084_755_873_936_59),
            (2.458_938_709_833_913, 9.576_728_918_265, 7.976_411_778_687_095),
        ];
        for (nu, q, expect) in cases {
            let m = characteristic_value(nu, q).unwrap();
            let c = cf().characteristic_value(nu, q).unwrap();
            assert!((m - expect).abs() < 1e-9, "{m} vs {expect}");
            assert!((c - expect).abs() < 1e-9, "{c} vs {expect}");
        }
    }

    #[test]
    fn backends_agree_at_large_q_and_order() {
        for (nu, q) in [(0.5, 20.0), (10.3, 40.0), (31.7, 5.0), (4.0, 30.0), (0.1, 100.0)] {
            let m = characteristic_value(nu, q).unwrap();
            let c = cf().characteristic_value(nu, q).unwrap();
            assert!((m - c).abs() < 1e-9 * m.abs().max(1.0), "nu={nu} q={q}: {m} vs {c}");
        }
    }

    #[test]
    fn coefficients_solve_the_recurrence() {
        for (nu, q, branch) in [(0.37, 3.0, Branch::Even), (2.0, 2.5, Branch::Even), (3.0, 1.5, Branch::Odd)] {
            let sol = MathieuSolver::default().with_branch(branch).solve(nu, q).unwrap();
            let c = |n: i64| sol.coefficients.get(&n).copied().unwrap_or(0.0);
            let norm: f64 = sol.coefficients.values().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            for n in -8..8 {
                let x = nu + 2.0 * n as f64;
                let res = x * x * c(n) + q * (c(n - 1) + c(n + 1)) - sol.a * c(n);
                assert!(res.abs() < 1e-9, "nu={nu} n={n}: residual {res}");
            }
        }
    }

    #[test]
    fn order_zero_has_no_odd_branch() {
        let odd = MathieuSolver::default().with_branch(Branch::Odd);
        assert!(odd.characteristic_value(0.0, 1.0).is_err());
    }

    #[test]
    fn out_of_domain_inputs_are_rejected() {
        assert!(characteristic_value(f64::NAN, 1.0).is_err());
        assert!(characteristic_value(1.5, 1e5).is_err());
        assert!(characteristic_value(500.0, 1.0).is_err());
    }

    #[test]
    fn tight_cap_reports_non_convergence() {
        let solver = MathieuSolver { max_cutoff: 20, ..Default::default() };
        assert!(matches!(solver.characteristic_value(0.5, 500.0), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn zero_q_is_exact() {
        for nu in [0.0, 0.5, 3.0, 17.25] {
            assert_eq!(characteristic_value(nu, 0.0).unwrap(), nu * nu);
        }
    }
}
