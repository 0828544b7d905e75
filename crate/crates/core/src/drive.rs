use std::fmt;
use std::sync::Arc;

/// Spatial profile `V(z)` of the periodic drive `lambda * V(z) * sin t`.
#[derive(Clone, Default)]
pub enum CouplingShape {
    /// `V(z) = z`.
    #[default]
    Dipole,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl CouplingShape {
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            CouplingShape::Dipole => z,
            CouplingShape::Custom(f) => f(z),
        }
    }
}

impl fmt::Debug for CouplingShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingShape::Dipole => f.write_str("Dipole"),
            CouplingShape::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Periodic modulation acting on the undriven system.
///
/// `coupling` is the scalar `V` entering the Mathieu parameter: the resonant
/// matrix element of the drive profile. Deriving it from `shape` is left to the
/// caller (see [`crate::spectra::coupling_matrix_element`]).
#[derive(Debug, Clone)]
pub struct DriveParams {
    /// Modulation strength `lambda >= 0`.
    pub lambda: f64,
    /// Resonant matrix element `V`.
    pub coupling: f64,
    /// Resonance order `N >= 1`.
    pub order: u32,
    pub shape: CouplingShape,
}

impl DriveParams {
    pub fn new(lambda: f64, coupling: f64, order: u32) -> Self {
        DriveParams { lambda, coupling, order, shape: CouplingShape::Dipole }
    }

    pub fn undriven() -> Self {
        DriveParams::new(0.0, 0.0, 1)
    }

    pub fn with_shape(mut self, shape: CouplingShape) -> Self {
        self.shape = shape;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        crate::error::ensure(self.lambda.is_finite() && self.lambda >= 0.0, || {
            format!("modulation strength must be finite and >= 0, got {}", self.lambda)
        })?;
        crate::error::ensure(self.coupling.is_finite(), || {
            format!("coupling amplitude must be finite, got {}", self.coupling)
        })?;
        crate::error::ensure(self.order >= 1, || "resonance order must be >= 1".to_string())
    }

    /// Drive frequency seen by the N-th resonance, `1/N`.
    pub fn resonance_frequency(&self) -> f64 {
        1.0 / self.order as f64
    }
}
