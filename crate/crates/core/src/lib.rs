//! Spectral simulation of 2D incompressible flow on a periodic box, with a
//! nudging-based state estimator that reconstructs the full velocity from
//! coarse observations of a single velocity component, plus closed-form
//! calculators for the tuning bounds that guarantee synchronization.

pub mod assimilation;
pub mod bounds;
pub mod error;
pub mod observers;
pub mod solver;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
pub use spectral::{C64, Grid, SpectralField, VelocityState};
