//! Two-component velocity fields and the divergence-free projection.

use super::calculus::partial;
use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct VelocityState {
    pub u1: SpectralField,
    pub u2: SpectralField,
}

impl VelocityState {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            u1: SpectralField::zeros(grid),
            u2: SpectralField::zeros(grid),
        }
    }

    pub fn new(u1: SpectralField, u2: SpectralField) -> Result<Self> {
        if u1.grid() != u2.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { u1, u2 })
    }

    /// Velocity with stream function `psi`: `u = (d_y psi, -d_x psi)`.
    /// Divergence-free by construction.
    pub fn from_streamfunction(psi: &SpectralField) -> Self {
        let mut u2 = partial(psi, 0);
        u2.scale_in_place(-1.0);
        Self {
            u1: partial(psi, 1),
            u2,
        }
    }

    pub fn grid(&self) -> Grid {
        self.u1.grid()
    }

    pub fn component(&self, idx: usize) -> &SpectralField {
        match idx {
            0 => &self.u1,
            1 => &self.u2,
            _ => panic!("velocity component index out of range"),
        }
    }

    pub fn norm_l2(&self) -> f64 {
        self.u1.norm_l2().hypot(self.u2.norm_l2())
    }

    pub fn seminorm_h1(&self) -> f64 {
        self.u1.seminorm_h1().hypot(self.u2.seminorm_h1())
    }

    pub fn seminorm_h2(&self) -> f64 {
        self.u1.seminorm_h2().hypot(self.u2.seminorm_h2())
    }

    /// Kinetic energy `||u||^2 / 2`.
    pub fn energy(&self) -> f64 {
        0.5 * self.norm_l2().powi(2)
    }

    pub fn divergence(&self) -> SpectralField {
        let mut div = partial(&self.u1, 0);
        div.add_scaled(1.0, &partial(&self.u2, 1));
        div
    }

    /// `||div u|| / ||grad u||`, zero for the zero field.
    pub fn divergence_ratio(&self) -> f64 {
        let denom = self.seminorm_h1();
        if denom == 0.0 {
            0.0
        } else {
            self.divergence().norm_l2() / denom
        }
    }

    /// Project onto divergence-free fields, mode by mode:
    /// `u(k) <- u(k) - k (k . u(k)) / |k|^2`.
    ///
    /// The per-mode matrix is real and even in `k`, so Hermitian symmetry is
    /// preserved bit for bit. Idempotent up to roundoff; exact on the image.
    pub fn project_divergence_free(&mut self) {
        let grid = self.grid();
        let n = grid.n();
        for i in 0..n {
            let kx = grid.mode(i) as f64;
            for j in 0..n {
                let ky = grid.mode(j) as f64;
                let kk = kx * kx + ky * ky;
                if kk == 0.0 {
                    continue;
                }
                let c1 = self.u1.coeffs()[(i, j)];
                let c2 = self.u2.coeffs()[(i, j)];
                let s = (c1 * kx + c2 * ky) / kk;
                self.u1.coeffs_mut()[(i, j)] = c1 - s * kx;
                self.u2.coeffs_mut()[(i, j)] = c2 - s * ky;
            }
        }
    }

    pub fn dealias_in_place(&mut self) {
        self.u1.dealias_in_place();
        self.u2.dealias_in_place();
    }

    pub fn scale_in_place(&mut self, a: f64) {
        self.u1.scale_in_place(a);
        self.u2.scale_in_place(a);
    }

    /// `self += a * other`. Panics on grid mismatch.
    pub fn add_scaled(&mut self, a: f64, other: &Self) {
        self.u1.add_scaled(a, &other.u1);
        self.u2.add_scaled(a, &other.u2);
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            u1: self.u1.sub(&other.u1)?,
            u2: self.u2.sub(&other.u2)?,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }

    /// Max pointwise speed `max |u(x)|` on the grid, for CFL control.
    pub fn max_speed(&self) -> f64 {
        let p1 = self.u1.to_physical();
        let p2 = self.u2.to_physical();
        p1.iter()
            .zip(p2.iter())
            .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)))
    }
}
