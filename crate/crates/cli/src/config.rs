//! Flat `key = value` configuration with dotted section prefixes.
//!
//! ```text
//! # comment
//! system.k_exp = 4
//! drive.lambda = 0.05
//! sweep.axis = drive.lambda
//! sweep.min = 0
//! sweep.max = 0.2
//! sweep.count = 5
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use revivals_core::mathieu::{Backend, Branch};
use revivals_core::spectra::PowerLawSystem;
use revivals_core::CouplingShape;

/// Every key the parser accepts.
pub const KEYS: &[&str] = &[
    "system.v0",
    "system.a",
    "system.k_exp",
    "system.mass",
    "system.hbar",
    "drive.lambda",
    "drive.order",
    "drive.coupling",
    "drive.shape",
    "level.r",
    "packet.n0",
    "packet.width",
    "spectrum.n_min",
    "spectrum.n_max",
    "spectrum.points_per_level",
    "spectrum.tolerance",
    "mathieu.nu_min",
    "mathieu.nu_max",
    "mathieu.nu_count",
    "mathieu.q_min",
    "mathieu.q_max",
    "mathieu.q_count",
    "mathieu.backend",
    "mathieu.branch",
    "grid.n_points",
    "grid.turning_fraction",
    "propagate.dt",
    "propagate.t_end",
    "propagate.samples_per_period",
    "detect.revival_threshold",
    "regime.weak_mu",
    "regime.weak_q",
    "regime.strong_mu",
    "regime.strong_beta",
    "verify.tol_cl",
    "verify.tol_q",
    "sweep.axis",
    "sweep.min",
    "sweep.max",
    "sweep.count",
    "output.path",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { line, key: key.to_string(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    line: Option<usize>,
    value: String,
}

/// Swept value (if any) and the configuration it produces.
pub type SweepPoint = (Option<f64>, RunConfig);

/// Parsed configuration. Values are checked when a command asks for them,
/// which every command does before it starts computing.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, Entry>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(err(Some(line), content, "expected `key = value`"));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(err(Some(line), key, "unknown key"));
            }
            if value.is_empty() {
                return Err(err(Some(line), key, "empty value"));
            }
            let entry = Entry { line: Some(line), value: value.to_string() };
            if let Some(prev) = entries.insert(key.to_string(), entry) {
                let first = prev.line.map_or(String::new(), |l| format!(" (first set on line {l})"));
                return Err(err(Some(line), key, format!("set twice{first}")));
            }
        }
        Ok(RunConfig { entries })
    }

    /// SHA-256 of the canonical `key=value` listing.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, e) in &self.entries {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(e.value.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn entry(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    pub fn str_opt(&self, key: &str) -> Option<&str> {
        self.entry(key).map(|e| e.value.as_str())
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => match e.value.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Some(v)),
                _ => Err(err(e.line, key, format!("expected a finite number, got '{}'", e.value))),
            },
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.f64_opt(key)?.ok_or_else(|| err(None, key, "missing required field"))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.entry(key) {
            None => Ok(default),
            Some(e) => e
                .value
                .parse::<usize>()
                .map_err(|_| err(e.line, key, format!("expected a non-negative integer, got '{}'", e.value))),
        }
    }

    /// Error tied to the line that set `key`.
    pub fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        err(self.entry(key).and_then(|e| e.line), key, message)
    }

    fn positive(&self, key: &str, value: f64) -> Result<f64, ConfigError> {
        if value > 0.0 {
            Ok(value)
        } else {
            Err(self.invalid(key, format!("must be > 0, got {value}")))
        }
    }

    pub fn system(&self) -> Result<PowerLawSystem, ConfigError> {
        let v0 = self.f64("system.v0")?;
        let a = self.f64("system.a")?;
        let k = self.f64("system.k_exp")?;
        let mass = self.f64("system.mass")?;
        let hbar = self.f64_or("system.hbar", 1.0)?;
        for (key, v) in [("system.v0", v0), ("system.a", a), ("system.k_exp", k), ("system.mass", mass), ("system.hbar", hbar)] {
            self.positive(key, v)?;
        }
        PowerLawSystem::new(v0, a, k, mass, hbar).map_err(|e| err(None, "system", e.to_string()))
    }

    pub fn shape(&self) -> Result<CouplingShape, ConfigError> {
        match self.str_opt("drive.shape").unwrap_or("dipole") {
            "dipole" => Ok(CouplingShape::Dipole),
            "quadratic" => Ok(CouplingShape::Custom(Arc::new(|z| z * z))),
            other => Err(self.invalid("drive.shape", format!("expected 'dipole' or 'quadratic', got '{other}'"))),
        }
    }

    /// Drive amplitude, order and coupling; `None` coupling means "auto".
    pub fn drive(&self) -> Result<(f64, u32, Option<f64>), ConfigError> {
        let lambda = self.f64_or("drive.lambda", 0.0)?;
        if lambda < 0.0 {
            return Err(self.invalid("drive.lambda", format!("must be >= 0, got {lambda}")));
        }
        let order = self.usize_or("drive.order", 1)?;
        if order == 0 || order > u32::MAX as usize {
            return Err(self.invalid("drive.order", format!("must be a positive integer, got {order}")));
        }
        let coupling = match self.str_opt("drive.coupling") {
            None | Some("auto") => None,
            Some(_) => Some(self.f64("drive.coupling")?),
        };
        Ok((lambda, order as u32, coupling))
    }

    pub fn level(&self) -> Result<f64, ConfigError> {
        let r = self.f64("level.r")?;
        if r < 0.0 {
            return Err(self.invalid("level.r", format!("must be >= 0, got {r}")));
        }
        Ok(r)
    }

    pub fn packet(&self) -> Result<(f64, f64), ConfigError> {
        let n0 = match self.f64_opt("packet.n0")? {
            Some(n0) => n0,
            None => self.level()?,
        };
        let width = self.f64_or("packet.width", 2.0)?;
        if n0 < 0.0 {
            return Err(self.invalid("packet.n0", format!("must be >= 0, got {n0}")));
        }
        if width < 0.0 {
            return Err(self.invalid("packet.width", format!("must be >= 0, got {width}")));
        }
        Ok((n0, width))
    }

    pub fn backend(&self) -> Result<Backend, ConfigError> {
        match self.str_opt("mathieu.backend").unwrap_or("matrix") {
            "matrix" => Ok(Backend::Matrix),
            "continued_fraction" => Ok(Backend::ContinuedFraction),
            other => Err(self.invalid("mathieu.backend", format!("expected 'matrix' or 'continued_fraction', got '{other}'"))),
        }
    }

    pub fn branch(&self) -> Result<Branch, ConfigError> {
        match self.str_opt("mathieu.branch").unwrap_or("even") {
            "even" => Ok(Branch::Even),
            "odd" => Ok(Branch::Odd),
            other => Err(self.invalid("mathieu.branch", format!("expected 'even' or 'odd', got '{other}'"))),
        }
    }

    /// `count` evenly spaced values from `prefix.min`/`_min` to `_max`.
    pub fn range(&self, min_key: &str, max_key: &str, count_key: &str, default: (f64, f64, usize)) -> Result<Vec<f64>, ConfigError> {
        let lo = self.f64_or(min_key, default.0)?;
        let hi = self.f64_or(max_key, default.1)?;
        let n = self.usize_or(count_key, default.2)?;
        linspace(lo, hi, n).map_err(|m| self.invalid(count_key, m))
    }

    /// Sweep points, each a full configuration with the axis key overridden.
    /// Without a sweep this is the configuration itself.
    pub fn sweep_points(&self) -> Result<(Option<String>, Vec<SweepPoint>), ConfigError> {
        let Some(axis) = self.str_opt("sweep.axis") else {
            for key in ["sweep.min", "sweep.max", "sweep.count"] {
                if self.contains(key) {
                    return Err(self.invalid(key, "set without sweep.axis"));
                }
            }
            return Ok((None, vec![(None, self.clone())]));
        };
        if !KEYS.contains(&axis) || axis.starts_with("sweep.") || axis == "output.path" {
            return Err(self.invalid("sweep.axis", format!("'{axis}' cannot be swept")));
        }
        let lo = self.f64("sweep.min")?;
        let hi = self.f64("sweep.max")?;
        let n = self.usize_or("sweep.count", 0)?;
        if n == 0 {
            return Err(err(None, "sweep.count", "missing required field"));
        }
        if n > 1 && hi <= lo {
            return Err(self.invalid("sweep.max", format!("sweep range must be strictly increasing, got [{lo}, {hi}]")));
        }
        let values = linspace(lo, hi, n).map_err(|m| self.invalid("sweep.count", m))?;
        let points = values
            .into_iter()
            .map(|v| {
                let mut c = self.clone();
                // Integral values stay parseable by integer keys.
                let value = if v.fract() == 0.0 && v.abs() < 1e15 { format!("{}", v as i64) } else { format!("{v:?}") };
                c.entries.insert(axis.to_string(), Entry { line: None, value });
                (Some(v), c)
            })
            .collect();
        Ok((Some(axis.to_string()), points))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, String> {
    match n {
        0 => Err("count must be >= 1".into()),
        1 => Ok(vec![lo]),
        _ if hi < lo => Err(format!("range must be ordered, got [{lo}, {hi}]")),
        _ => Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()),
    }
}
