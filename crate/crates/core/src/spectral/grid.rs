//! Uniform periodic grid on the square torus `[0, L]^2`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Discretization of the periodic box `[0, L]^2` with `N` modes per dimension.
///
/// Integer wavevectors run over `-N/2 ..= N/2 - 1` per axis (FFT storage
/// order); the physical wavenumber of integer mode `k` is `(2*pi/L) * k`.
/// The smallest Stokes eigenvalue on this box is `lambda1 = (2*pi/L)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    l: f64,
}

impl Grid {
    /// Build a grid with `n` modes per dimension on a box of side `l`.
    ///
    /// `n` must be even and at least 8; `l` must be positive and finite.
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n % 2 != 0 || n < 8 {
            return Err(Error::InvalidGrid(format!(
                "N must be even and >= 8, got {n}"
            )));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidGrid(format!("L must be positive, got {l}")));
        }
        Ok(Self { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Fundamental wavenumber `2*pi/L`.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.l
    }

    /// Smallest Stokes eigenvalue `(2*pi/L)^2`.
    pub fn lambda1(&self) -> f64 {
        let k0 = self.k0();
        k0 * k0
    }

    /// Grid spacing `L/N`.
    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Integer wavenumber of storage index `i` (FFT order).
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        debug_assert!(i < self.n);
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Storage index of integer wavenumber `k` in `-N/2 ..= N/2`.
    #[inline]
    pub fn index_of(&self, k: i64) -> usize {
        let n = self.n as i64;
        debug_assert!(-n / 2 <= k && k <= n / 2);
        k.rem_euclid(n) as usize
    }

    /// Physical wavenumber of storage index `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> f64 {
        self.k0() * self.mode(i) as f64
    }

    /// Physical coordinate of grid point `j` along either axis.
    #[inline]
    pub fn coord(&self, j: usize) -> f64 {
        self.l * j as f64 / self.n as f64
    }

    /// True when index `i` holds the Nyquist mode `N/2`.
    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda1_values() {
        let g = Grid::new(64, 2.0 * PI).unwrap();
        assert_eq!(g.lambda1(), 1.0);
        let g = Grid::new(64, PI).unwrap();
        assert_eq!(g.lambda1(), 4.0);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(7, 1.0).is_err());
        assert!(Grid::new(6, 1.0).is_err());
        assert!(Grid::new(64, 0.0).is_err());
        assert!(Grid::new(64, -1.0).is_err());
        assert!(Grid::new(64, f64::NAN).is_err());
    }

    #[test]
    fn mode_index_roundtrip() {
        let g = Grid::new(8, 1.0).unwrap();
        let modes: Vec<i64> = (0..8).map(|i| g.mode(i)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        for k in -3..=4 {
            assert_eq!(g.mode(g.index_of(k)), k);
        }
        // Nyquist aliases: -N/2 and +N/2 share a slot.
        assert_eq!(g.index_of(-4), g.index_of(4));
    }
}
