//! Coarse observation operators: linear maps modeling measurements at
//! resolution `h`, each returning a zero-mean spectral field.
//!
//! * `fourier_modes` keeps the low Fourier modes with physical wavenumber
//!   `|k| <= 1/h` (an orthogonal projection).
//! * `volume_elements` replaces the field by its cell averages on an `M x M`
//!   partition, `M = round(L/h)`.
//! * `nodal` samples the field on an `M x M` lattice and spans the periodic
//!   bilinear interpolant through the samples.
//!
//! The lattice variants quantize the resolution: the effective `h` is `L/M`
//! and is what parameter conditions should use.

use ndarray::Array2;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{C64, Grid, SpectralField, VelocityState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObserverKind {
    FourierModes,
    VolumeElements,
    Nodal,
}

impl ObserverKind {
    pub fn name(self) -> &'static str {
        match self {
            ObserverKind::FourierModes => "fourier_modes",
            ObserverKind::VolumeElements => "volume_elements",
            ObserverKind::Nodal => "nodal",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fourier_modes" => Ok(ObserverKind::FourierModes),
            "volume_elements" => Ok(ObserverKind::VolumeElements),
            "nodal" => Ok(ObserverKind::Nodal),
            other => Err(Error::InvalidObserver(format!(
                "unknown observer kind '{other}' (expected fourier_modes, volume_elements, or nodal)"
            ))),
        }
    }

    /// Nodal observation carries the mixed first/second-order approximation
    /// bound; the other two carry the plain first-order bound.
    pub fn is_type_two(self) -> bool {
        matches!(self, ObserverKind::Nodal)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Observer {
    kind: ObserverKind,
    grid: Grid,
    h_requested: f64,
    /// Lattice size for the cell/node observers, unused for fourier_modes.
    m: usize,
}

impl Observer {
    pub fn new(kind: ObserverKind, grid: Grid, h: f64) -> Result<Self> {
        if !h.is_finite() || h <= 0.0 || h >= grid.l() {
            return Err(Error::InvalidObserver(format!(
                "observation resolution must satisfy 0 < h < L, got h = {h}, L = {}",
                grid.l()
            )));
        }
        let mut m = 0;
        if kind != ObserverKind::FourierModes {
            m = (grid.l() / h).round() as usize;
            if m < 2 {
                return Err(Error::InvalidObserver(format!(
                    "lattice observer needs at least 2 cells per side, h = {h} gives {m}"
                )));
            }
            if m > grid.n() {
                return Err(Error::InvalidObserver(format!(
                    "lattice observer finer than the grid: {m} cells per side vs N = {}",
                    grid.n()
                )));
            }
        }
        Ok(Self {
            kind,
            grid,
            h_requested: h,
            m,
        })
    }

    pub fn kind(&self) -> ObserverKind {
        self.kind
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn h_requested(&self) -> f64 {
        self.h_requested
    }

    /// Resolution actually realized: `L/M` for lattice observers, the
    /// requested `h` for the mode projection.
    pub fn h_eff(&self) -> f64 {
        match self.kind {
            ObserverKind::FourierModes => self.h_requested,
            _ => self.grid.l() / self.m as f64,
        }
    }

    pub fn lattice_size(&self) -> Option<usize> {
        match self.kind {
            ObserverKind::FourierModes => None,
            _ => Some(self.m),
        }
    }

    /// Largest integer mode index passed by the fourier_modes projection.
    pub fn cutoff_index(&self) -> Option<i64> {
        match self.kind {
            ObserverKind::FourierModes => {
                Some((1.0 / (self.h_requested * self.grid.k0())).floor() as i64)
            }
            _ => None,
        }
    }

    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        if f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        match self.kind {
            ObserverKind::FourierModes => Ok(self.apply_fourier(f)),
            ObserverKind::VolumeElements => self.apply_volume(f),
            ObserverKind::Nodal => self.apply_nodal(f),
        }
    }

    /// The one-component measurement: `I_h` of the second velocity component.
    pub fn observed_signal(&self, state: &VelocityState) -> Result<SpectralField> {
        self.apply(&state.u2)
    }

    fn apply_fourier(&self, f: &SpectralField) -> SpectralField {
        let cut2 = (1.0 / self.h_requested).powi(2);
        let mut out = f.clone();
        let n = self.grid.n();
        for i in 0..n {
            let kx = self.grid.wavenumber(i);
            for j in 0..n {
                let ky = self.grid.wavenumber(j);
                if kx * kx + ky * ky > cut2 {
                    out.coeffs_mut()[(i, j)] = C64::new(0.0, 0.0);
                }
            }
        }
        out.coeffs_mut()[(0, 0)] = C64::new(0.0, 0.0);
        out
    }

    fn apply_volume(&self, f: &SpectralField) -> Result<SpectralField> {
        let n = self.grid.n();
        let m = self.m;
        let p = f.to_physical();
        let mut sums = Array2::<f64>::zeros((m, m));
        let mut counts = Array2::<usize>::zeros((m, m));
        // Grid point i lands in cell floor(x_i / h_eff) = i*m/n exactly.
        let cell = |i: usize| i * m / n;
        for i in 0..n {
            for j in 0..n {
                sums[(cell(i), cell(j))] += p[(i, j)];
                counts[(cell(i), cell(j))] += 1;
            }
        }
        let mut step = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let c = (cell(i), cell(j));
                step[(i, j)] = sums[c] / counts[c] as f64;
            }
        }
        // from_physical zeroes the mean coefficient, which is exactly the
        // required mean subtraction of the step function on the grid.
        SpectralField::from_physical(self.grid, &step)
    }

    fn apply_nodal(&self, f: &SpectralField) -> Result<SpectralField> {
        let n = self.grid.n();
        let m = self.m;
        let k0 = self.grid.k0();
        let h_eff = self.h_eff();

        // Sample the band-limited field at the M x M node lattice by
        // separable trigonometric sums: F = E1^T C E2, O(N^2 M + N M^2).
        let mut e = Array2::<C64>::zeros((n, m));
        for i in 0..n {
            let k = self.grid.mode(i) as f64;
            for c in 0..m {
                let phase = k0 * k * (c as f64 * h_eff);
                e[(i, c)] = Complex::from_polar(1.0, phase);
            }
        }
        let a = f.coeffs().dot(&e); // (n, m)
        let samples = e.t().dot(&a); // (m, m)

        // Periodic bilinear interpolant through the samples, evaluated at
        // the grid points. s = x_i / h_eff = i*m/n is exact in integers.
        let mut lower = vec![0usize; n];
        let mut frac = vec![0.0f64; n];
        for i in 0..n {
            lower[i] = i * m / n;
            frac[i] = (i * m % n) as f64 / n as f64;
        }
        let mut vals = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            let (ci, ti) = (lower[i], frac[i]);
            let ci1 = (ci + 1) % m;
            for j in 0..n {
                let (cj, tj) = (lower[j], frac[j]);
                let cj1 = (cj + 1) % m;
                let v = samples[(ci, cj)].re * (1.0 - ti) * (1.0 - tj)
                    + samples[(ci1, cj)].re * ti * (1.0 - tj)
                    + samples[(ci, cj1)].re * (1.0 - ti) * tj
                    + samples[(ci1, cj1)].re * ti * tj;
                vals[(i, j)] = v;
            }
        }
        SpectralField::from_physical(self.grid, &vals)
    }
}

/// Empirical approximation constants of an observer over an ensemble.
#[derive(Debug, Clone)]
pub struct ConstantsReport {
    /// Smallest constant making the observer's approximation bound hold on
    /// every ensemble member (`max(1, c0_hat)` is what conditions should use).
    pub c0_hat: f64,
    /// Per-field ratios against the bound evaluated at `c0_hat`; all <= 1 by
    /// construction, with at least one equal to 1.
    pub ratios: Vec<f64>,
}

/// Estimate the observer's approximation constant on an ensemble.
///
/// First-order observers: `c0_hat = max ||w - I_h w|| / (h ||grad w||)`.
/// The nodal observer carries the mixed bound
/// `||w - I_h w||^2 <= (1/2) c0^2 h^2 ||grad w||^2 + (1/4) c0^4 h^4 ||lap w||^2`;
/// the minimal `c0` per field solves a quadratic in `c0^2` exactly.
pub fn measure_constants(obs: &Observer, ensemble: &[SpectralField]) -> Result<ConstantsReport> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let h = obs.h_eff();
    let mut errs = Vec::with_capacity(ensemble.len());
    for (idx, w) in ensemble.iter().enumerate() {
        if w.norm_l2() == 0.0 || w.seminorm_h1() == 0.0 {
            return Err(Error::ZeroField(idx));
        }
        let iw = obs.apply(w)?;
        let e = w.sub(&iw)?.norm_l2();
        errs.push((e, w.seminorm_h1(), w.seminorm_h2()));
    }

    let c0_hat = if obs.kind().is_type_two() {
        let mut worst = 0.0f64;
        for &(e, g, lap) in &errs {
            let a = 0.5 * h * h * g * g;
            let b = 0.25 * h.powi(4) * lap * lap;
            let e2 = e * e;
            // a x + b x^2 = e^2 with x = c0^2; positive root.
            let x = if b > 0.0 {
                (-a + (a * a + 4.0 * b * e2).sqrt()) / (2.0 * b)
            } else {
                e2 / a
            };
            worst = worst.max(x.sqrt());
        }
        worst
    } else {
        errs.iter()
            .map(|&(e, g, _)| e / (h * g))
            .fold(0.0f64, f64::max)
    };

    let ratios = errs
        .iter()
        .map(|&(e, g, lap)| {
            let bound2 = if obs.kind().is_type_two() {
                0.5 * c0_hat.powi(2) * h * h * g * g
                    + 0.25 * c0_hat.powi(4) * h.powi(4) * lap * lap
            } else {
                (c0_hat * h * g).powi(2)
            };
            if bound2 == 0.0 { 0.0 } else { e / bound2.sqrt() }
        })
        .collect();

    Ok(ConstantsReport { c0_hat, ratios })
}
