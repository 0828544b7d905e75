//! Revival and classical recurrence times of periodically driven power-law wells.

pub mod drive;
pub mod error;
pub mod mathieu;
pub mod oracle;
pub mod propagate;
pub mod revival;
pub mod spectra;
pub mod time;
pub mod tridiag;

pub use drive::{CouplingShape, DriveParams};
pub use error::{Error, Result};
pub use time::Time;
