//! Differential operators acting on spectral coefficients.
//!
//! First derivatives zero the Nyquist row and column: the `N/2` mode has no
//! sign-unambiguous odd derivative on an even grid. Dealiased fields have no
//! Nyquist content, so this only matters for raw external data.

use num_complex::Complex;

use super::field::{C64, SpectralField};

/// Partial derivative along `axis` (0 = x1, 1 = x2).
pub fn partial(f: &SpectralField, axis: usize) -> SpectralField {
    assert!(axis < 2);
    let grid = f.grid();
    let n = grid.n();
    let mut out = f.clone();
    for i in 0..n {
        for j in 0..n {
            let k = if axis == 0 {
                grid.wavenumber(i)
            } else {
                grid.wavenumber(j)
            };
            let c = out.coeffs_mut()[(i, j)];
            out.coeffs_mut()[(i, j)] = C64::new(0.0, k) * c;
        }
    }
    out.zero_nyquist();
    out
}

pub fn gradient(f: &SpectralField) -> (SpectralField, SpectralField) {
    (partial(f, 0), partial(f, 1))
}

/// Laplacian; the multiplier `-|k|^2` is even, so Nyquist needs no special case.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let n = grid.n();
    let mut out = f.clone();
    for i in 0..n {
        let kx = grid.wavenumber(i);
        for j in 0..n {
            let ky = grid.wavenumber(j);
            out.coeffs_mut()[(i, j)] *= Complex::new(-(kx * kx + ky * ky), 0.0);
        }
    }
    out
}
