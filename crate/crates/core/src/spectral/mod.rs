pub mod calculus;
mod fft;
pub mod field;
pub mod grid;
pub mod velocity;

pub use field::{C64, SpectralField};
pub use grid::Grid;
pub use velocity::VelocityState;
