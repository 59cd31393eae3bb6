//! Scalar fields represented by their Fourier-series coefficients.
//!
//! The forward transform is normalized by `1/N^2`, so a stored coefficient
//! `c(k)` is the Fourier-series coefficient of `exp(i * (2*pi/L) * k . x)` and
//! single-mode fields have coefficients one can read off by hand. With this
//! convention Parseval reads `||f||_{L2} = L * sqrt(sum |c(k)|^2)`.
//!
//! Two invariants are enforced on every field built from physical data and
//! preserved by all spectral operations in this crate:
//! * zero spatial mean: `c(0,0) == 0` exactly,
//! * Hermitian symmetry: `c(-k) == conj(c(k))` exactly, so the field is real.

use ndarray::Array2;
use num_complex::Complex;

use super::fft;
use super::grid::Grid;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Array2<C64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: Array2::zeros((grid.n(), grid.n())),
        }
    }

    /// Forward transform of a real `N x N` sample array.
    ///
    /// The mean is removed (the `k = 0` coefficient is hard-set to zero) and
    /// the coefficients are symmetrized exactly.
    pub fn from_physical(grid: Grid, values: &Array2<f64>) -> Result<Self> {
        let n = grid.n();
        if values.dim() != (n, n) {
            return Err(Error::ShapeMismatch {
                expected: (n, n),
                got: values.dim(),
            });
        }
        let mut coeffs = values.mapv(|v| C64::new(v, 0.0));
        fft::forward(&mut coeffs);
        let scale = 1.0 / (n * n) as f64;
        coeffs.mapv_inplace(|c| c * scale);
        let mut field = Self { grid, coeffs };
        field.enforce_invariants();
        Ok(field)
    }

    /// Inverse transform to real `N x N` samples at the grid points.
    pub fn to_physical(&self) -> Array2<f64> {
        let mut work = self.coeffs.clone();
        fft::inverse(&mut work);
        work.mapv(|c| c.re)
    }

    /// Inverse transform onto a `factor`-times refined grid by zero padding.
    ///
    /// The shared Nyquist coefficient, if nonzero, is split evenly between
    /// `+N/2` and `-N/2` so the refined samples agree with the coarse ones.
    pub fn to_physical_refined(&self, factor: usize) -> Array2<f64> {
        assert!(factor >= 1);
        let n = self.grid.n();
        let m = n * factor;
        let mut big: Array2<C64> = Array2::zeros((m, m));
        let half = (n / 2) as i64;
        let mi = m as i64;
        for i in 0..n {
            let k1 = self.grid.mode(i);
            for j in 0..n {
                let k2 = self.grid.mode(j);
                let c = self.coeffs[(i, j)];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut targets: Vec<(i64, i64, f64)> = vec![(k1, k2, 1.0)];
                if k1 == half && k2 == half {
                    targets = vec![
                        (half, half, 0.25),
                        (-half, half, 0.25),
                        (half, -half, 0.25),
                        (-half, -half, 0.25),
                    ];
                } else if k1 == half {
                    targets = vec![(half, k2, 0.5), (-half, k2, 0.5)];
                } else if k2 == half {
                    targets = vec![(k1, half, 0.5), (k1, -half, 0.5)];
                }
                for (a, b, w) in targets {
                    let ia = a.rem_euclid(mi) as usize;
                    let ib = b.rem_euclid(mi) as usize;
                    big[(ia, ib)] += c * w;
                }
            }
        }
        fft::inverse(&mut big);
        big.mapv(|c| c.re)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &Array2<C64> {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut Array2<C64> {
        &mut self.coeffs
    }

    /// Coefficient of the integer wavevector `(k1, k2)`.
    pub fn mode(&self, k1: i64, k2: i64) -> C64 {
        self.coeffs[(self.grid.index_of(k1), self.grid.index_of(k2))]
    }

    /// Set the coefficient of `(k1, k2)` together with its Hermitian partner.
    ///
    /// For self-conjugate wavevectors (`k = 0` axes and Nyquist) the imaginary
    /// part of `value` is dropped; `(0, 0)` stays zero.
    pub fn set_mode_pair(&mut self, k1: i64, k2: i64, value: C64) {
        if k1 == 0 && k2 == 0 {
            return;
        }
        let i = self.grid.index_of(k1);
        let j = self.grid.index_of(k2);
        let n = self.grid.n();
        let ip = (n - i) % n;
        let jp = (n - j) % n;
        if (i, j) == (ip, jp) {
            self.coeffs[(i, j)] = C64::new(value.re, 0.0);
        } else {
            self.coeffs[(i, j)] = value;
            self.coeffs[(ip, jp)] = value.conj();
        }
    }

    /// `||f||_{L2}` by Parseval.
    pub fn norm_l2(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        self.grid.l() * sum.sqrt()
    }

    /// `||grad f||_{L2}` by Parseval.
    pub fn seminorm_h1(&self) -> f64 {
        self.weighted_norm(|k2| k2)
    }

    /// `||laplacian f||_{L2}` by Parseval.
    pub fn seminorm_h2(&self) -> f64 {
        self.weighted_norm(|k2| k2 * k2)
    }

    fn weighted_norm(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let n = self.grid.n();
        let mut sum = 0.0;
        for i in 0..n {
            let kx = self.grid.wavenumber(i);
            for j in 0..n {
                let ky = self.grid.wavenumber(j);
                let c = self.coeffs[(i, j)];
                if c != C64::new(0.0, 0.0) {
                    sum += weight(kx * kx + ky * ky) * c.norm_sqr();
                }
            }
        }
        self.grid.l() * sum.sqrt()
    }

    /// Zero all modes with `max(|k1|, |k2|) > N/3` (2/3-rule truncation).
    pub fn dealias_in_place(&mut self) {
        let n = self.grid.n() as i64;
        for i in 0..self.grid.n() {
            let k1 = self.grid.mode(i).abs();
            for j in 0..self.grid.n() {
                let k2 = self.grid.mode(j).abs();
                if 3 * k1.max(k2) > n {
                    self.coeffs[(i, j)] = C64::new(0.0, 0.0);
                }
            }
        }
    }

    pub fn dealiased(&self) -> Self {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    /// Zero the Nyquist row and column (applied after differentiation).
    pub(crate) fn zero_nyquist(&mut self) {
        let ny = self.grid.n() / 2;
        for j in 0..self.grid.n() {
            self.coeffs[(ny, j)] = C64::new(0.0, 0.0);
            self.coeffs[(j, ny)] = C64::new(0.0, 0.0);
        }
    }

    /// Hard-set the mean to zero and make Hermitian symmetry exact.
    pub(crate) fn enforce_invariants(&mut self) {
        let n = self.grid.n();
        self.coeffs[(0, 0)] = C64::new(0.0, 0.0);
        for i in 0..n {
            let ip = (n - i) % n;
            for j in 0..n {
                let jp = (n - j) % n;
                if (i, j) < (ip, jp) {
                    self.coeffs[(ip, jp)] = self.coeffs[(i, j)].conj();
                } else if (i, j) == (ip, jp) {
                    self.coeffs[(i, j)].im = 0.0;
                }
            }
        }
    }

    /// Largest deviation from Hermitian symmetry, for diagnostics.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let n = self.grid.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let ip = (n - i) % n;
            for j in 0..n {
                let jp = (n - j) % n;
                worst = worst.max((self.coeffs[(ip, jp)] - self.coeffs[(i, j)].conj()).norm());
            }
        }
        worst
    }

    /// Coefficient at `k = 0` (exactly zero for a valid field).
    pub fn mean_coeff(&self) -> C64 {
        self.coeffs[(0, 0)]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn scale_in_place(&mut self, a: f64) {
        self.coeffs.mapv_inplace(|c| c * a);
    }

    /// `self += a * other`. Panics on grid mismatch.
    pub fn add_scaled(&mut self, a: f64, other: &Self) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        ndarray::Zip::from(&mut self.coeffs)
            .and(&other.coeffs)
            .for_each(|s, o| *s += o * a);
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        Ok(out)
    }

    /// L2 inner product `(f, g)` by Parseval.
    pub fn inner_l2(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let l2 = self.grid.l() * self.grid.l();
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        l2 * sum
    }

    /// Max of |f| over the physical grid.
    pub fn max_abs_physical(&self) -> f64 {
        self.to_physical().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid64() -> Grid {
        Grid::new(64, 2.0 * PI).unwrap()
    }

    fn cosine_x(grid: Grid) -> Array2<f64> {
        let n = grid.n();
        Array2::from_shape_fn((n, n), |(i, _)| (2.0 * PI * grid.coord(i) / grid.l()).cos())
    }

    #[test]
    fn cosine_transforms_to_half_pair() {
        let g = grid64();
        let f = SpectralField::from_physical(g, &cosine_x(g)).unwrap();
        assert!((f.mode(1, 0) - C64::new(0.5, 0.0)).norm() < 1e-13);
        assert!((f.mode(-1, 0) - C64::new(0.5, 0.0)).norm() < 1e-13);
        let energy: f64 = f.coeffs().iter().map(|c| c.norm_sqr()).sum();
        assert!((energy - 0.5).abs() < 1e-12);
    }

    #[test]
    fn roundtrip_zero_mean_random() {
        let g = grid64();
        let n = g.n();
        let mut vals = Array2::from_shape_fn((n, n), |(i, j)| {
            ((i * 7919 + j * 104729) % 1000) as f64 / 500.0 - 1.0
        });
        let mean = vals.sum() / (n * n) as f64;
        vals.mapv_inplace(|v| v - mean);
        let f = SpectralField::from_physical(g, &vals).unwrap();
        let back = f.to_physical();
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in back.iter().zip(vals.iter()) {
            assert!((a - b).abs() <= 1e-12 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn constant_field_is_zeroed() {
        let g = grid64();
        let vals = Array2::from_elem((g.n(), g.n()), 3.7);
        let f = SpectralField::from_physical(g, &vals).unwrap();
        assert_eq!(f.mean_coeff(), C64::new(0.0, 0.0));
        assert_eq!(f.norm_l2(), 0.0);
    }

    #[test]
    fn parseval_against_quadrature() {
        let g = grid64();
        let n = g.n();
        let mut vals = Array2::from_shape_fn((n, n), |(i, j)| {
            (g.coord(i)).sin() * (2.0 * g.coord(j)).cos() + 0.3 * (3.0 * g.coord(i)).cos()
        });
        let mean = vals.sum() / (n * n) as f64;
        vals.mapv_inplace(|v| v - mean);
        let f = SpectralField::from_physical(g, &vals).unwrap();
        let dx = g.dx();
        let quad: f64 = vals.iter().map(|v| v * v * dx * dx).sum();
        let n2 = f.norm_l2().powi(2);
        assert!((quad - n2).abs() <= 1e-10 * quad.max(1e-300));
    }

    #[test]
    fn single_mode_norm_relations() {
        let g = grid64();
        let mut f = SpectralField::zeros(g);
        f.set_mode_pair(3, 2, C64::new(0.4, -0.1));
        let kk = (3.0f64 * 3.0 + 2.0 * 2.0).sqrt() * g.k0();
        assert!((f.seminorm_h1() - kk * f.norm_l2()).abs() < 1e-12);
        assert!((f.seminorm_h2() - kk * kk * f.norm_l2()).abs() < 1e-12);
    }

    #[test]
    fn dealias_cutoff_n12() {
        let g = Grid::new(12, 1.0).unwrap();
        let mut f = SpectralField::zeros(g);
        f.set_mode_pair(4, 0, C64::new(1.0, 0.0));
        f.set_mode_pair(5, 0, C64::new(1.0, 0.0));
        f.set_mode_pair(0, 5, C64::new(1.0, 2.0));
        let d = f.dealiased();
        assert_eq!(d.mode(4, 0), C64::new(1.0, 0.0));
        assert_eq!(d.mode(5, 0), C64::new(0.0, 0.0));
        assert_eq!(d.mode(0, 5), C64::new(0.0, 0.0));
        // idempotent
        let dd = d.dealiased();
        assert_eq!(d.coeffs(), dd.coeffs());
    }

    #[test]
    fn refined_transform_matches_coarse_points() {
        let g = grid64();
        let f = SpectralField::from_physical(g, &cosine_x(g)).unwrap();
        let coarse = f.to_physical();
        let fine = f.to_physical_refined(2);
        for i in 0..g.n() {
            for j in 0..g.n() {
                assert!((coarse[(i, j)] - fine[(2 * i, 2 * j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let g = grid64();
        let vals = Array2::zeros((16, 16));
        assert!(matches!(
            SpectralField::from_physical(g, &vals),
            Err(crate::error::Error::ShapeMismatch { .. })
        ));
    }
}
