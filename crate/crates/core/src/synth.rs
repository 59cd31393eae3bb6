//! Seeded random field generators for tests, ensembles, and initial data.
//!
//! Modes are drawn in a fixed `(k1, k2)` order that does not depend on the
//! grid resolution, so the same seed produces the same continuum field on any
//! grid that can hold the band. Ensemble statistics computed on different
//! resolutions are therefore comparable.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::spectral::{C64, Grid, SpectralField, VelocityState};

/// Band-limited random spectrum: modes with `max(|k1|, |k2|) <= kmax`,
/// amplitude damped by `(1 + |k|^2)^(-decay / 2)`.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumSpec {
    pub kmax: i64,
    pub decay: f64,
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        Self {
            kmax: 10,
            decay: 2.0,
        }
    }
}

/// Random zero-mean real scalar field with the given spectrum.
///
/// Panics if the band does not fit strictly inside the grid.
pub fn random_scalar(grid: Grid, spec: SpectrumSpec, rng: &mut impl Rng) -> SpectralField {
    assert!(spec.kmax >= 1);
    assert!(
        (spec.kmax as usize) < grid.n() / 2,
        "spectrum band must fit inside the grid"
    );
    let mut f = SpectralField::zeros(grid);
    for k1 in 0..=spec.kmax {
        let k2_range: Box<dyn Iterator<Item = i64>> = if k1 == 0 {
            Box::new(1..=spec.kmax)
        } else {
            Box::new(-spec.kmax..=spec.kmax)
        };
        for k2 in k2_range {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let kk = (k1 * k1 + k2 * k2) as f64;
            let amp = (1.0 + kk).powf(-spec.decay / 2.0);
            f.set_mode_pair(k1, k2, C64::new(re * amp, im * amp));
        }
    }
    f
}

/// Random divergence-free velocity built from a random stream function.
pub fn random_velocity(grid: Grid, spec: SpectrumSpec, rng: &mut impl Rng) -> VelocityState {
    let psi = random_scalar(grid, spec, rng);
    VelocityState::from_streamfunction(&psi)
}

/// Rescale `v` so that `||v|| == target`. A zero field stays zero.
pub fn normalized_to(mut v: VelocityState, target: f64) -> VelocityState {
    let norm = v.norm_l2();
    if norm > 0.0 {
        v.scale_in_place(target / norm);
    }
    v
}
