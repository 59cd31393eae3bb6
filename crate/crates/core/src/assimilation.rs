//! Co-integration of the reference flow and the nudged estimator.
//!
//! Only one velocity component is ever read from the reference solution: the
//! feedback term is `-mu (I_h(U_c) - I_h(u_c))` applied to component `c` of
//! the estimator (`c = 2` by default). Both systems share the grid and the
//! time step so the comparison isolates the information restriction, not
//! numerical discrepancy.

use serde::{Deserialize, Serialize};

use crate::bounds::{self, MuBound, PhysicalSetup, grashof, initial_condition_satisfied};
use crate::error::{Error, Result};
use crate::observers::{Observer, ObserverKind, measure_constants};
use crate::solver::{
    Forcing, ForcingKind, SolverParams, TimeStepper, make_forcing, run_spinup,
};
use crate::spectral::{Grid, SpectralField, VelocityState};
use crate::synth::{self, SpectrumSpec};

/// Start state of the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorInit {
    /// Both components zero (the default; needs no prior information).
    Zero,
    /// Reference state plus a random divergence-free field of norm `eps`.
    Perturbed { eps: f64 },
    /// Exactly the reference state (synchrony sanity check).
    Exact,
}

/// Start state of the reference flow, fed to spin-up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceInit {
    /// Start from rest; the forcing develops the flow during spin-up.
    Rest,
    /// Seeded random divergence-free field with the given norm.
    Random { amplitude: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssimilationConfig {
    pub n: usize,
    pub l: f64,
    pub nu: f64,
    pub dt: f64,
    pub forcing: ForcingKind,
    pub grashof: f64,
    pub t_spin: f64,
    pub t_assim: f64,
    pub mu: f64,
    pub observer: ObserverKind,
    pub h: f64,
    /// Which velocity component is observed (1 or 2).
    pub observed_component: usize,
    pub u0: EstimatorInit,
    pub ref_init: ReferenceInit,
    /// Steps between recorded samples.
    pub record_every: usize,
    /// Master seed; random reference data and estimator perturbations
    /// draw independent streams derived from it.
    pub seed: u64,
    /// Theorem constant for the gain thresholds in run metadata.
    pub c: f64,
    /// Flow-size bound constant for the start-size flag in run metadata.
    pub c_tilde: f64,
}

impl AssimilationConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n < 8 || self.n % 2 != 0 {
            problems.push(format!("grid size must be even and at least 8, got {}", self.n));
        }
        if !(self.l > 0.0) || !self.l.is_finite() {
            problems.push(format!("box size must be positive, got {}", self.l));
        }
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            problems.push(format!("viscosity must be positive, got {}", self.nu));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            problems.push(format!("time step must be positive, got {}", self.dt));
        }
        if !(self.grashof > 0.0) || !self.grashof.is_finite() {
            problems.push(format!("grashof must be positive, got {}", self.grashof));
        }
        if !(self.t_spin >= 0.0) || !self.t_spin.is_finite() {
            problems.push(format!("t_spin must be non-negative, got {}", self.t_spin));
        }
        if !(self.t_assim > 0.0) || !self.t_assim.is_finite() {
            problems.push(format!("t_assim must be positive, got {}", self.t_assim));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            problems.push(format!("mu must be non-negative, got {}", self.mu));
        }
        if self.mu * self.dt > 1.0 {
            problems.push(format!(
                "explicit nudging needs mu*dt <= 1, got {}",
                self.mu * self.dt
            ));
        }
        if !(self.h > 0.0) || !self.h.is_finite() || (self.l > 0.0 && self.h >= self.l) {
            problems.push(format!("resolution must satisfy 0 < h < L, got {}", self.h));
        }
        if self.observed_component != 1 && self.observed_component != 2 {
            problems.push(format!(
                "observed component must be 1 or 2, got {}",
                self.observed_component
            ));
        }
        if self.record_every == 0 {
            problems.push("record_every must be at least 1".into());
        }
        if let EstimatorInit::Perturbed { eps } = self.u0 {
            if !(eps >= 0.0) || !eps.is_finite() {
                problems.push(format!("perturbation size must be non-negative, got {eps}"));
            }
        }
        if let ReferenceInit::Random { amplitude } = self.ref_init {
            if !(amplitude > 0.0) || !amplitude.is_finite() {
                problems.push(format!(
                    "reference amplitude must be positive, got {amplitude}"
                ));
            }
        }
        for (name, v) in [("c", self.c), ("c_tilde", self.c_tilde)] {
            if !(v > 0.0) || !v.is_finite() {
                problems.push(format!("{name} must be positive, got {v}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.l)
    }
}

/// Recorded trajectory of synchronization errors and energies.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    pub err_l2: Vec<f64>,
    pub err_h1: Vec<f64>,
    pub err_l2_u1: Vec<f64>,
    pub err_l2_u2: Vec<f64>,
    pub energy_ref: Vec<f64>,
    pub energy_da: Vec<f64>,
}

/// One sample of the tracked norms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErrorRow {
    pub err_l2: f64,
    pub err_h1: f64,
    pub err_l2_u1: f64,
    pub err_l2_u2: f64,
    pub energy_ref: f64,
    pub energy_da: f64,
}

impl ErrorSeries {
    pub fn push(&mut self, t: f64, row: ErrorRow) {
        self.times.push(t);
        self.err_l2.push(row.err_l2);
        self.err_h1.push(row.err_h1);
        self.err_l2_u1.push(row.err_l2_u1);
        self.err_l2_u2.push(row.err_l2_u2);
        self.energy_ref.push(row.energy_ref);
        self.energy_da.push(row.energy_da);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Synchronization norms between the two trajectories.
pub fn error_metrics(reference: &VelocityState, estimator: &VelocityState) -> Result<ErrorRow> {
    if reference.grid() != estimator.grid() {
        return Err(Error::GridMismatch);
    }
    let diff = reference.sub(estimator)?;
    Ok(ErrorRow {
        err_l2: diff.norm_l2(),
        err_h1: diff.seminorm_h1(),
        err_l2_u1: diff.u1.norm_l2(),
        err_l2_u2: diff.u2.norm_l2(),
        energy_ref: reference.energy(),
        energy_da: estimator.energy(),
    })
}

/// The feedback field `mu (I_h(u_c) - I_h(U_c))` to add to estimator
/// component `c` (0-based index returned alongside).
pub fn nudging_term(
    obs: &Observer,
    reference: &VelocityState,
    estimator: &VelocityState,
    mu: f64,
    observed_component: usize,
) -> Result<(usize, SpectralField)> {
    let idx = observed_component - 1;
    let measured = obs.apply(reference.component(idx))?;
    let estimated = obs.apply(estimator.component(idx))?;
    let mut term = measured.sub(&estimated)?;
    term.scale_in_place(mu);
    Ok((idx, term))
}

/// Advance both systems by one coupled step. Information flows from the
/// reference to the estimator only through the observed component.
#[allow(clippy::too_many_arguments)]
pub fn step_pair(
    ref_stepper: &mut TimeStepper,
    da_stepper: &mut TimeStepper,
    reference: &mut VelocityState,
    estimator: &mut VelocityState,
    f: &Forcing,
    obs: &Observer,
    mu: f64,
    observed_component: usize,
) -> Result<()> {
    if ref_stepper.time() != da_stepper.time() {
        return Err(Error::TimeMismatch(ref_stepper.time(), da_stepper.time()));
    }
    let (idx, term) = nudging_term(obs, reference, estimator, mu, observed_component)?;
    ref_stepper.step(reference, f, None)?;
    da_stepper.step(estimator, f, Some((idx, &term)))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RunStatus {
    Ok,
    /// Integration produced a non-finite state or refused a step; the series
    /// holds everything recorded up to that point.
    Failed { reason: String, at_time: f64 },
}

/// Gain thresholds per regime alongside whether the configured gain meets them.
#[derive(Debug, Clone, Serialize)]
pub struct GainCheck {
    pub regime: String,
    pub mu_min: MuBound,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub config: AssimilationConfig,
    pub g: f64,
    pub forcing_norm: f64,
    pub lambda1: f64,
    pub h_eff: f64,
    pub cutoff_index: Option<i64>,
    pub lattice_size: Option<usize>,
    /// Empirical interpolation constant of the observer on a fixed ensemble.
    pub c0_hat: f64,
    /// `max(1, c0_hat)`, the constant used in parameter conditions.
    pub c0_used: f64,
    /// `mu * c0_used^2 * h_eff^2 <= nu`.
    pub satisfies_paper: bool,
    pub gain_checks: Vec<GainCheck>,
    /// Start-size flag for the estimator (reported, not enforced).
    pub initial_condition_ok: bool,
    pub spinup_steps: usize,
    pub spinup_max_grad: f64,
    pub spinup_max_lap: f64,
    pub max_cfl: f64,
    /// Worst scaled divergence over recorded samples of both trajectories.
    pub max_div_ratio: f64,
    pub status: RunStatus,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub series: ErrorSeries,
    pub metadata: RunMetadata,
    /// Final states, for checkpointing and post-run inspection.
    pub reference: VelocityState,
    pub estimator: VelocityState,
    /// Model time at the end of the run (integration may stop early).
    pub end_time: f64,
}

/// Size of the fixed ensemble used to estimate the observer constant.
const C0_ENSEMBLE: usize = 20;
const C0_SEED: u64 = 0xC0;

fn reference_initial_state(cfg: &AssimilationConfig, grid: Grid) -> VelocityState {
    match cfg.ref_init {
        ReferenceInit::Rest => VelocityState::zeros(grid),
        ReferenceInit::Random { amplitude } => {
            let mut rng: rand_chacha::ChaCha8Rng =
                rand::SeedableRng::seed_from_u64(cfg.seed.wrapping_add(1));
            let spec = SpectrumSpec {
                kmax: (grid.n() as i64 / 3).min(10),
                decay: 2.0,
            };
            synth::normalized_to(synth::random_velocity(grid, spec, &mut rng), amplitude)
        }
    }
}

fn estimator_initial_state(
    cfg: &AssimilationConfig,
    grid: Grid,
    reference: &VelocityState,
) -> VelocityState {
    match cfg.u0 {
        EstimatorInit::Zero => VelocityState::zeros(grid),
        EstimatorInit::Exact => reference.clone(),
        EstimatorInit::Perturbed { eps } => {
            let mut rng: rand_chacha::ChaCha8Rng =
                rand::SeedableRng::seed_from_u64(cfg.seed.wrapping_add(2));
            let spec = SpectrumSpec {
                kmax: (grid.n() as i64 / 3).min(10),
                decay: 2.0,
            };
            let noise = synth::normalized_to(synth::random_velocity(grid, spec, &mut rng), eps);
            let mut u = reference.clone();
            u.add_scaled(1.0, &noise);
            u
        }
    }
}

fn c0_ensemble(grid: Grid) -> Vec<SpectralField> {
    let mut rng: rand_chacha::ChaCha8Rng = rand::SeedableRng::seed_from_u64(C0_SEED);
    let spec = SpectrumSpec {
        kmax: (grid.n() as i64 / 3).min(10),
        decay: 2.0,
    };
    (0..C0_ENSEMBLE)
        .map(|_| synth::random_scalar(grid, spec, &mut rng))
        .collect()
}

/// Spin up the reference, start the estimator, co-integrate, and record.
/// Integration failures truncate the series and set the failed status
/// instead of returning an error.
pub fn run_assimilation(cfg: &AssimilationConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let params = SolverParams::new(cfg.nu, cfg.dt)?;
    let forcing = make_forcing(grid, cfg.nu, cfg.grashof, cfg.forcing)?;
    let observer = Observer::new(cfg.observer, grid, cfg.h)?;

    let (mut reference, spin_stats) =
        run_spinup(reference_initial_state(cfg, grid), &forcing, params, cfg.t_spin)?;
    let mut estimator = estimator_initial_state(cfg, grid, &reference);
    estimator.dealias_in_place();
    estimator.project_divergence_free();

    let c0_hat = measure_constants(&observer, &c0_ensemble(grid))?.c0_hat;
    let c0_used = c0_hat.max(1.0);
    let setup = PhysicalSetup::new(cfg.nu, grid.lambda1(), forcing.norm_l2())?
        .with_constants(cfg.c, cfg.c_tilde, c0_used)?;
    let h_eff = observer.h_eff();

    let gain_checks = bounds::ALL_REGIMES
        .iter()
        .map(|&regime| {
            let b = bounds::mu_min(&setup, regime);
            GainCheck {
                regime: regime.name().to_string(),
                satisfied: match b.value {
                    bounds::Magnitude::Linear(v) => cfg.mu >= v,
                    bounds::Magnitude::Log(_) => false,
                },
                mu_min: b,
            }
        })
        .collect();

    let initial_condition_ok =
        initial_condition_satisfied(&setup, estimator.seminorm_h1().powi(2));

    let mut series = ErrorSeries::default();
    let mut status = RunStatus::Ok;
    let mut max_div = divergence_pair(&reference, &estimator);
    series.push(0.0, error_metrics(&reference, &estimator)?);

    let mut ref_stepper = TimeStepper::new(grid, params);
    let mut da_stepper = TimeStepper::new(grid, params);
    let steps = (cfg.t_assim / cfg.dt).round() as usize;
    for s in 1..=steps {
        let advanced = step_pair(
            &mut ref_stepper,
            &mut da_stepper,
            &mut reference,
            &mut estimator,
            &forcing,
            &observer,
            cfg.mu,
            cfg.observed_component,
        );
        if let Err(e) = advanced {
            status = RunStatus::Failed {
                reason: e.to_string(),
                at_time: s as f64 * cfg.dt,
            };
            break;
        }
        if s % cfg.record_every == 0 || s == steps {
            series.push(s as f64 * cfg.dt, error_metrics(&reference, &estimator)?);
            max_div = max_div.max(divergence_pair(&reference, &estimator));
        }
    }

    let satisfies_paper = cfg.mu * c0_used * c0_used * h_eff * h_eff <= cfg.nu;
    let end_time = ref_stepper.time();
    Ok(RunOutcome {
        series,
        metadata: RunMetadata {
            config: cfg.clone(),
            g: grashof(&setup),
            forcing_norm: forcing.norm_l2(),
            lambda1: grid.lambda1(),
            h_eff,
            cutoff_index: observer.cutoff_index(),
            lattice_size: observer.lattice_size(),
            c0_hat,
            c0_used,
            satisfies_paper,
            gain_checks,
            initial_condition_ok,
            spinup_steps: spin_stats.steps,
            spinup_max_grad: spin_stats.max_grad_norm,
            spinup_max_lap: spin_stats.max_lap_norm,
            max_cfl: ref_stepper.max_cfl_seen().max(da_stepper.max_cfl_seen()),
            max_div_ratio: max_div,
            status,
        },
        reference,
        estimator,
        end_time,
    })
}

fn divergence_pair(a: &VelocityState, b: &VelocityState) -> f64 {
    a.divergence_ratio().max(b.divergence_ratio())
}

/// Exponential rate fitted to `ln err_l2` over a time window.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    /// Slope of the least-squares line; negative means decay.
    pub rate: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Time window over which `err_l2` is still decaying: from the start to the
/// first global minimum, excluding any exact zeros (synchronized to the bit).
/// `None` when the series is empty or starts non-positive.
pub fn decaying_window(series: &ErrorSeries) -> Option<(f64, f64)> {
    if series.is_empty() || !(series.err_l2[0] > 0.0) {
        return None;
    }
    let mut end = 0;
    for (i, &e) in series.err_l2.iter().enumerate() {
        if !(e > 0.0) {
            break;
        }
        if e < series.err_l2[end] {
            end = i;
        }
    }
    Some((series.times[0], series.times[end]))
}

/// Orders of magnitude between the initial error and the smallest recorded
/// error; infinite if the trajectories synchronize to the bit.
pub fn decay_orders(series: &ErrorSeries) -> Option<f64> {
    if series.is_empty() || !(series.err_l2[0] > 0.0) {
        return None;
    }
    let min = series.err_l2.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Some(f64::INFINITY);
    }
    Some((series.err_l2[0] / min).log10())
}

pub fn fit_decay_rate(series: &ErrorSeries, window: (f64, f64)) -> Result<DecayFit> {
    let (t_a, t_b) = window;
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (i, &t) in series.times.iter().enumerate() {
        if t >= t_a && t <= t_b {
            let e = series.err_l2[i];
            if !(e > 0.0) {
                return Err(Error::NonPositiveErrors);
            }
            ts.push(t);
            ys.push(e.ln());
        }
    }
    let n = ts.len();
    if n < 10 {
        return Err(Error::TooFewSamples {
            needed: 10,
            found: n,
        });
    }
    let nf = n as f64;
    let t_mean = ts.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let mut stt = 0.0;
    let mut sty = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dt = ts[i] - t_mean;
        let dy = ys[i] - y_mean;
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    let rate = if stt > 0.0 { sty / stt } else { 0.0 };
    let ss_res = (syy - rate * sty).max(0.0);
    // A flat series is a perfect fit with zero slope.
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(DecayFit {
        rate,
        r_squared,
        samples: n,
    })
}
