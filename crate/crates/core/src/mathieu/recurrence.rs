use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

use super::Branch;

/// Orders closer than this to an integer use the reduced integer-order recurrences.
pub(crate) const INTEGER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Reduced {
    /// `a_{2s}`: cos terms `cos(2jz)`, j >= 0.
    EvenCos,
    /// `b_{2s}`: sin terms `sin(2(j+1)z)`, j >= 0.
    EvenSin,
    /// `a_{2s+1}`: cos terms `cos((2j+1)z)`.
    OddCos,
    /// `b_{2s+1}`: sin terms `sin((2j+1)z)`.
    OddSin,
}

/// Infinite symmetric tridiagonal operator whose eigenvalue is the
/// characteristic value, written on a Fourier basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Recurrence {
    /// Coefficients `c_n`, `n` in Z, of `sum c_n exp(i(nu+2n)z)`; non-integer `nu > 0`.
    TwoSided { nu: f64 },
    /// One-sided recurrence at integer order, branch number `s`.
    Reduced { kind: Reduced, s: i64 },
}

impl Recurrence {
    pub(crate) fn new(nu: f64, branch: Branch) -> Result<Self> {
        if !nu.is_finite() {
            return Err(Error::Domain(format!("order must be finite, got {nu}")));
        }
        let nu = nu.abs();
        let rounded = nu.round();
        if (nu - rounded).abs() > INTEGER_TOLERANCE * nu.max(1.0) {
            return Ok(Recurrence::TwoSided { nu });
        }
        let m = rounded as i64;
        let (kind, s) = match (m % 2 == 0, branch) {
            (true, Branch::Even) => (Reduced::EvenCos, m / 2),
            (true, Branch::Odd) => {
                if m == 0 {
                    return Err(Error::Domain("no antisymmetric solution exists at order 0".into()));
                }
                (Reduced::EvenSin, m / 2)
            }
            (false, Branch::Even) => (Reduced::OddCos, (m - 1) / 2),
            (false, Branch::Odd) => (Reduced::OddSin, (m - 1) / 2),
        };
        Ok(Recurrence::Reduced { kind, s })
    }

    /// Smallest valid index, `None` when the recurrence is unbounded below.
    pub(crate) fn lowest_index(&self) -> Option<i64> {
        match self {
            Recurrence::TwoSided { .. } => None,
            Recurrence::Reduced { .. } => Some(0),
        }
    }

    /// Index whose diagonal equals `nu^2` at `q = 0`.
    pub(crate) fn target(&self) -> i64 {
        match *self {
            Recurrence::TwoSided { .. } => 0,
            Recurrence::Reduced { kind: Reduced::EvenSin, s } => s - 1,
            Recurrence::Reduced { s, .. } => s,
        }
    }

    pub(crate) fn diag(&self, j: i64, q: f64) -> f64 {
        match *self {
            Recurrence::TwoSided { nu } => {
                let x = nu + 2.0 * j as f64;
                x * x
            }
            Recurrence::Reduced { kind, .. } => {
                let jf = j as f64;
                match kind {
                    Reduced::EvenCos => 4.0 * jf * jf,
                    Reduced::EvenSin => 4.0 * (jf + 1.0) * (jf + 1.0),
                    Reduced::OddCos | Reduced::OddSin => {
                        let x = 2.0 * jf + 1.0;
                        let edge = match (j, kind) {
                            (0, Reduced::OddCos) => q,
                            (0, _) => -q,
                            _ => 0.0,
                        };
                        x * x + edge
                    }
                }
            }
        }
    }

    /// Coupling between indices `j` and `j + 1`.
    pub(crate) fn off(&self, j: i64, q: f64) -> f64 {
        match self {
            Recurrence::Reduced { kind: Reduced::EvenCos, .. } if j == 0 => SQRT_2 * q,
            _ => q,
        }
    }

    /// Rank of the target among the `q = 0` diagonal entries of `[lo, hi]`.
    pub(crate) fn rank_in(&self, lo: i64, hi: i64) -> usize {
        match *self {
            Recurrence::TwoSided { nu } => {
                (lo..=hi).filter(|&n| (nu + 2.0 * n as f64).abs() < nu).count()
            }
            Recurrence::Reduced { .. } => (self.target() - lo) as usize,
        }
    }

    /// Index window `[lo, hi]` reaching `margin` entries past the target region.
    pub(crate) fn window(&self, margin: i64) -> (i64, i64) {
        match *self {
            Recurrence::TwoSided { nu } => (-(nu.ceil() as i64) - margin, margin),
            Recurrence::Reduced { .. } => (0, self.target() + margin),
        }
    }

    /// Maps a real eigenvector on `[lo, lo + len)` to two-sided coefficients
    /// `c_n` of `exp(i(nu+2n)z)`, normalized to unit sum of squares.
    pub(crate) fn to_two_sided(self, lo: i64, v: &[f64]) -> BTreeMap<i64, f64> {
        let mut out = BTreeMap::new();
        match self {
            Recurrence::TwoSided { .. } => {
                for (j, &c) in v.iter().enumerate() {
                    out.insert(lo + j as i64, c);
                }
            }
            Recurrence::Reduced { kind, s } => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                for (j, &c) in v.iter().enumerate() {
                    let j = lo + j as i64;
                    match kind {
                        Reduced::EvenCos if j == 0 => {
                            out.insert(-s, c);
                        }
                        Reduced::EvenCos => {
                            out.insert(j - s, h * c);
                            out.insert(-j - s, h * c);
                        }
                        Reduced::EvenSin => {
                            out.insert(j + 1 - s, h * c);
                            out.insert(-j - 1 - s, -h * c);
                        }
                        Reduced::OddCos => {
                            out.insert(j - s, h * c);
                            out.insert(-j - 1 - s, h * c);
                        }
                        Reduced::OddSin => {
                            out.insert(j - s, h * c);
                            out.insert(-j - 1 - s, -h * c);
                        }
                    }
                }
            }
        }
        out
    }
}
