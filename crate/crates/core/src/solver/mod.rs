//! Time integration of the incompressible flow on the periodic box.
//!
//! Scheme: Crank-Nicolson on the viscous term (per-mode rational multiplier,
//! unconditionally stable) and 2nd-order Adams-Bashforth on the advective,
//! forcing, and feedback terms, with an Euler startup step. The assembled
//! explicit right-hand side is dealiased and projected divergence-free, which
//! eliminates the pressure gradient.

pub mod checkpoint;

pub use checkpoint::{read_checkpoint, write_checkpoint};

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::calculus::partial;
use crate::spectral::{C64, Grid, SpectralField, VelocityState};
use crate::synth::{SpectrumSpec, random_scalar};

/// Time-independent body force, divergence-free and zero-mean.
#[derive(Debug, Clone)]
pub struct Forcing {
    state: VelocityState,
    norm_l2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingKind {
    /// Single shear mode `f = A (sin(4 k0 x2), 0)`.
    Kolmogorov,
    /// Seeded random divergence-free field supported on `|k| <= 4`.
    LowModeRandom { seed: u64 },
}

impl Forcing {
    pub fn zero(grid: Grid) -> Self {
        Self {
            state: VelocityState::zeros(grid),
            norm_l2: 0.0,
        }
    }

    /// Wrap explicit components; projects, dealiases, and caches the norm.
    pub fn from_components(f1: SpectralField, f2: SpectralField) -> Result<Self> {
        let mut state = VelocityState::new(f1, f2)?;
        state.dealias_in_place();
        state.project_divergence_free();
        let norm_l2 = state.norm_l2();
        Ok(Self { state, norm_l2 })
    }

    pub fn f1(&self) -> &SpectralField {
        &self.state.u1
    }

    pub fn f2(&self) -> &SpectralField {
        &self.state.u2
    }

    pub fn as_state(&self) -> &VelocityState {
        &self.state
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_l2
    }

    pub fn grid(&self) -> Grid {
        self.state.grid()
    }
}

/// Build a forcing whose Grashof number `||f|| / (nu^2 lambda1)` equals
/// `g_target` to roundoff.
pub fn make_forcing(grid: Grid, nu: f64, g_target: f64, kind: ForcingKind) -> Result<Forcing> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "viscosity must be positive, got {nu}"
        )));
    }
    if !(g_target > 0.0) || !g_target.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Grashof target must be positive, got {g_target}"
        )));
    }
    let target_norm = g_target * nu * nu * grid.lambda1();
    let mut state = match kind {
        ForcingKind::Kolmogorov => {
            let mut f1 = SpectralField::zeros(grid);
            // sin(4 k0 x2) has coefficients -i/2 at (0, 4) and i/2 at (0, -4).
            f1.set_mode_pair(0, 4, C64::new(0.0, -0.5));
            VelocityState::new(f1, SpectralField::zeros(grid))?
        }
        ForcingKind::LowModeRandom { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = random_scalar(
                grid,
                SpectrumSpec {
                    kmax: 4,
                    decay: 1.0,
                },
                &mut rng,
            );
            let mut v = VelocityState::from_streamfunction(&psi);
            // Trim the square band |k|_inf <= 4 down to the disk |k| <= 4.
            for com in [&mut v.u1, &mut v.u2] {
                for k1 in -4i64..=4 {
                    for k2 in -4i64..=4 {
                        if k1 * k1 + k2 * k2 > 16 {
                            com.set_mode_pair(k1, k2, C64::new(0.0, 0.0));
                        }
                    }
                }
            }
            v
        }
    };
    let norm = state.norm_l2();
    assert!(norm > 0.0, "forcing construction produced a zero field");
    state.scale_in_place(target_norm / norm);
    Forcing::from_components(state.u1, state.u2)
}

#[derive(Debug, Clone, Copy)]
pub struct SolverParams {
    pub nu: f64,
    pub dt: f64,
    /// Truncate the assembled right-hand side to the 2/3 band each step.
    pub dealias: bool,
}

impl SolverParams {
    pub fn new(nu: f64, dt: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be positive, got {nu}"
            )));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        Ok(Self {
            nu,
            dt,
            dealias: true,
        })
    }
}

/// Convective term `((u . grad) u_1, (u . grad) u_2)`, dealiased, plus the
/// max pointwise speed (free byproduct, used for the CFL check).
pub struct NonlinearTerm {
    pub t1: SpectralField,
    pub t2: SpectralField,
    pub max_speed: f64,
}

/// Pseudospectral convective term: transform to physical space, multiply
/// pointwise, transform back, truncate to the 2/3 band. On band-limited
/// input the truncated product equals the exact Galerkin convolution.
pub fn nonlinear_term(state: &VelocityState) -> Result<NonlinearTerm> {
    let grid = state.grid();
    let p1 = state.u1.to_physical();
    let p2 = state.u2.to_physical();
    let d1x = partial(&state.u1, 0).to_physical();
    let d1y = partial(&state.u1, 1).to_physical();
    let d2x = partial(&state.u2, 0).to_physical();
    let d2y = partial(&state.u2, 1).to_physical();

    let n = grid.n();
    let mut conv1 = Array2::zeros((n, n));
    let mut conv2 = Array2::zeros((n, n));
    let mut max_speed = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let a = p1[(i, j)];
            let b = p2[(i, j)];
            conv1[(i, j)] = a * d1x[(i, j)] + b * d1y[(i, j)];
            conv2[(i, j)] = a * d2x[(i, j)] + b * d2y[(i, j)];
            max_speed = max_speed.max(a.hypot(b));
        }
    }
    let mut t1 = SpectralField::from_physical(grid, &conv1)?;
    let mut t2 = SpectralField::from_physical(grid, &conv2)?;
    t1.dealias_in_place();
    t2.dealias_in_place();
    Ok(NonlinearTerm { t1, t2, max_speed })
}

/// Diagnostics from one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    /// Advective CFL number `dt * max|u| * N / L`.
    pub cfl: f64,
    pub max_speed: f64,
}

/// CFL number above which a step is refused.
pub const CFL_ERROR: f64 = 1.0;
/// CFL number above which callers should warn.
pub const CFL_WARN: f64 = 0.5;

/// One integration stream. Owns the Adams-Bashforth history, so use one
/// stepper instance per trajectory.
pub struct TimeStepper {
    grid: Grid,
    params: SolverParams,
    mul_old: Array2<f64>,
    mul_rhs: Array2<f64>,
    prev_rhs: Option<VelocityState>,
    time: f64,
    max_cfl_seen: f64,
}

impl TimeStepper {
    pub fn new(grid: Grid, params: SolverParams) -> Self {
        let n = grid.n();
        let mut mul_old = Array2::zeros((n, n));
        let mut mul_rhs = Array2::zeros((n, n));
        for i in 0..n {
            let kx = grid.wavenumber(i);
            for j in 0..n {
                let ky = grid.wavenumber(j);
                let z = params.nu * (kx * kx + ky * ky) * params.dt;
                mul_old[(i, j)] = (1.0 - 0.5 * z) / (1.0 + 0.5 * z);
                mul_rhs[(i, j)] = params.dt / (1.0 + 0.5 * z);
            }
        }
        Self {
            grid,
            params,
            mul_old,
            mul_rhs,
            prev_rhs: None,
            time: 0.0,
            max_cfl_seen: 0.0,
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn params(&self) -> SolverParams {
        self.params
    }

    pub fn max_cfl_seen(&self) -> f64 {
        self.max_cfl_seen
    }

    /// Drop the multistep history and reset the clock (fresh Euler startup).
    pub fn reset(&mut self) {
        self.prev_rhs = None;
        self.time = 0.0;
        self.max_cfl_seen = 0.0;
    }

    /// Advance `u` by one step. `extra_rhs` adds a field to one component
    /// (0 or 1) of the explicit right-hand side before projection; with no
    /// extra term the update is exactly the plain flow step.
    pub fn step(
        &mut self,
        u: &mut VelocityState,
        f: &Forcing,
        extra_rhs: Option<(usize, &SpectralField)>,
    ) -> Result<StepInfo> {
        let nl = nonlinear_term(u)?;
        let cfl = self.params.dt * nl.max_speed * self.grid.n() as f64 / self.grid.l();
        self.max_cfl_seen = self.max_cfl_seen.max(cfl);
        if cfl > CFL_ERROR {
            return Err(Error::CflViolation {
                cfl,
                time: self.time,
            });
        }

        let mut rhs = f.as_state().clone();
        rhs.u1.add_scaled(-1.0, &nl.t1);
        rhs.u2.add_scaled(-1.0, &nl.t2);
        if let Some((component, extra)) = extra_rhs {
            match component {
                0 => rhs.u1.add_scaled(1.0, extra),
                1 => rhs.u2.add_scaled(1.0, extra),
                _ => panic!("velocity component index out of range"),
            }
        }
        if self.params.dealias {
            rhs.dealias_in_place();
        }
        rhs.project_divergence_free();

        // Adams-Bashforth combination; first step falls back to Euler.
        let effective = match &self.prev_rhs {
            Some(prev) => {
                let mut e = rhs.clone();
                e.scale_in_place(1.5);
                e.add_scaled(-0.5, prev);
                e
            }
            None => rhs.clone(),
        };

        for (com, ecom) in [(&mut u.u1, &effective.u1), (&mut u.u2, &effective.u2)] {
            let coeffs = com.coeffs_mut();
            for ((i, j), c) in coeffs.indexed_iter_mut() {
                *c = *c * self.mul_old[(i, j)] + ecom.coeffs()[(i, j)] * self.mul_rhs[(i, j)];
            }
        }

        self.time += self.params.dt;
        if !u.is_finite() {
            return Err(Error::IntegrationFailure { time: self.time });
        }
        self.prev_rhs = Some(rhs);
        Ok(StepInfo {
            cfl,
            max_speed: nl.max_speed,
        })
    }
}

/// Summary of a spin-up integration, taken over the last 20% of steps.
#[derive(Debug, Clone, Copy)]
pub struct SpinupStats {
    pub steps: usize,
    pub max_grad_norm: f64,
    pub max_lap_norm: f64,
    pub max_cfl: f64,
}

/// Integrate the reference flow for `t_spin` and return the settled state
/// with the clock reset to zero.
pub fn run_spinup(
    u0: VelocityState,
    f: &Forcing,
    params: SolverParams,
    t_spin: f64,
) -> Result<(VelocityState, SpinupStats)> {
    if !(t_spin >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spin-up time must be non-negative, got {t_spin}"
        )));
    }
    let steps = (t_spin / params.dt).round() as usize;
    let mut u = u0;
    u.dealias_in_place();
    u.project_divergence_free();
    let mut stepper = TimeStepper::new(u.grid(), params);
    let tail_start = steps - steps / 5;
    let mut stats = SpinupStats {
        steps,
        max_grad_norm: u.seminorm_h1(),
        max_lap_norm: u.seminorm_h2(),
        max_cfl: 0.0,
    };
    for s in 0..steps {
        stepper.step(&mut u, f, None)?;
        if s + 1 >= tail_start {
            stats.max_grad_norm = stats.max_grad_norm.max(u.seminorm_h1());
            stats.max_lap_norm = stats.max_lap_norm.max(u.seminorm_h2());
        }
    }
    stats.max_cfl = stepper.max_cfl_seen();
    Ok((u, stats))
}

/// Decaying vortex pair `u = (-cos x sin y, sin x cos y) e^{-2 nu t}`,
/// an exact unforced solution on the `2 pi` box. Solver oracle.
pub fn taylor_green_exact(grid: Grid, nu: f64, t: f64) -> Result<VelocityState> {
    if (grid.l() - 2.0 * std::f64::consts::PI).abs() > 1e-12 {
        return Err(Error::InvalidParameter(
            "analytic vortex oracle requires the 2 pi box".into(),
        ));
    }
    let s = (-2.0 * nu * t).exp();
    let mut u1 = SpectralField::zeros(grid);
    let mut u2 = SpectralField::zeros(grid);
    // -cos x sin y = (i/4)(e^{ix} + e^{-ix})(e^{iy} - e^{-iy})
    u1.set_mode_pair(1, 1, C64::new(0.0, 0.25 * s));
    u1.set_mode_pair(1, -1, C64::new(0.0, -0.25 * s));
    // sin x cos y = (-i/4)(e^{ix} - e^{-ix})(e^{iy} + e^{-iy})
    u2.set_mode_pair(1, 1, C64::new(0.0, -0.25 * s));
    u2.set_mode_pair(1, -1, C64::new(0.0, -0.25 * s));
    VelocityState::new(u1, u2)
}
