use std::fmt;

/// A recurrence time that may be unbounded.
///
/// Linear spectra never revive, so the quantum revival time of a harmonic
/// system is `Unbounded`. Arithmetic on times goes through [`Time::rate`]
/// where an unbounded time maps to a zero rate, so no floating-point infinity
/// ever enters a formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Time {
    Finite(f64),
    Unbounded,
}

impl Time {
    pub fn finite(self) -> Option<f64> {
        match self {
            Time::Finite(t) => Some(t),
            Time::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Time::Unbounded)
    }

    /// Reciprocal `1/T`, with an unbounded time giving zero.
    pub fn rate(self) -> f64 {
        match self {
            Time::Finite(t) => 1.0 / t,
            Time::Unbounded => 0.0,
        }
    }

    /// Multiplies a finite time by `factor`; unbounded stays unbounded.
    pub fn scale(self, factor: f64) -> Time {
        match self {
            Time::Finite(t) => Time::Finite(factor * t),
            Time::Unbounded => Time::Unbounded,
        }
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Time::Finite(t) => write!(f, "{t}"),
            Time::Unbounded => f.write_str("unbounded"),
        }
    }
}
