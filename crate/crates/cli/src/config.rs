//! TOML run configuration.
//!
//! Parsing is strict: unknown keys are rejected, and missing required keys
//! are reported together rather than one at a time. Constraint violations
//! (negative viscosity, `mu*dt > 1`, ...) are likewise aggregated by the
//! core validator.
//!
//! Defaults: `l` has no default (required), `t_spin = 10/(nu*lambda1)`,
//! `t_assim = 20/(nu*lambda1)`, `u0 = "zero"`, `ref_init = "rest"`,
//! `record_every = 10`, `seed = 0`, Kolmogorov forcing with Grashof 1,
//! observed component 2, `c = c_tilde = 1`.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{Context, Result, bail};
use nudge2d::assimilation::{AssimilationConfig, EstimatorInit, ReferenceInit};
use nudge2d::observers::ObserverKind;
use nudge2d::solver::ForcingKind;
use serde::Deserialize;

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawFile {
    grid: Option<RawGrid>,
    solver: Option<RawSolver>,
    #[serde(default)]
    forcing: RawForcing,
    observer: Option<RawObserver>,
    nudging: Option<RawNudging>,
    #[serde(default)]
    run: RawRun,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<usize>,
    l: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    nu: Option<f64>,
    dt: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawForcing {
    kind: Option<String>,
    grashof: Option<f64>,
    /// Seed for the random forcing realization; defaults to `run.seed`.
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObserver {
    kind: Option<String>,
    h: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNudging {
    mu: Option<f64>,
    observed_component: Option<usize>,
    t_spin: Option<f64>,
    t_assim: Option<f64>,
    u0: Option<RawInit>,
    record_every: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRun {
    seed: Option<u64>,
    ref_init: Option<RawInit>,
    c: Option<f64>,
    c_tilde: Option<f64>,
}

/// Initial-state spec: a bare name (`"zero"`, `"exact"`, `"rest"`) or a
/// table like `{ kind = "perturbed", eps = 0.1 }`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawInit {
    Name(String),
    Table {
        kind: String,
        eps: Option<f64>,
        amplitude: Option<f64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    mu: Option<Vec<f64>>,
    h: Option<Vec<f64>>,
    observer: Option<Vec<String>>,
    seeds: Option<Vec<u64>>,
    workers: Option<usize>,
}

/// Cross-product sweep over gain, resolution, observer kind, and seed.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: AssimilationConfig,
    pub mu: Vec<f64>,
    pub h: Vec<f64>,
    pub observers: Vec<ObserverKind>,
    pub seeds: Vec<u64>,
    pub workers: Option<usize>,
}

impl SweepSpec {
    pub fn size(&self) -> usize {
        self.mu.len() * self.h.len() * self.observers.len() * self.seeds.len()
    }

    /// All run configs with stable ids, in axis order mu, h, observer, seed.
    pub fn expand(&self) -> Vec<(String, AssimilationConfig)> {
        let mut out = Vec::with_capacity(self.size());
        let mut idx = 0usize;
        for &mu in &self.mu {
            for &h in &self.h {
                for &obs in &self.observers {
                    for &seed in &self.seeds {
                        let mut cfg = self.base.clone();
                        cfg.mu = mu;
                        cfg.h = h;
                        cfg.observer = obs;
                        cfg.seed = seed;
                        out.push((format!("run_{idx:05}"), cfg));
                        idx += 1;
                    }
                }
            }
        }
        out
    }
}

fn read_raw(path: &Path) -> Result<RawFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

fn convert_u0(raw: &RawInit, problems: &mut Vec<String>) -> EstimatorInit {
    match raw {
        RawInit::Name(s) => match s.as_str() {
            "zero" => EstimatorInit::Zero,
            "exact" => EstimatorInit::Exact,
            other => {
                problems.push(format!(
                    "nudging.u0: unknown value '{other}' (expected \"zero\", \"exact\", or {{ kind = \"perturbed\", eps = ... }})"
                ));
                EstimatorInit::Zero
            }
        },
        RawInit::Table { kind, eps, .. } => match (kind.as_str(), eps) {
            ("perturbed", Some(e)) => EstimatorInit::Perturbed { eps: *e },
            ("perturbed", None) => {
                problems.push("nudging.u0: perturbed start needs an eps value".into());
                EstimatorInit::Zero
            }
            (other, _) => {
                problems.push(format!("nudging.u0: unknown kind '{other}'"));
                EstimatorInit::Zero
            }
        },
    }
}

fn convert_ref_init(raw: &RawInit, problems: &mut Vec<String>) -> ReferenceInit {
    match raw {
        RawInit::Name(s) => match s.as_str() {
            "rest" => ReferenceInit::Rest,
            other => {
                problems.push(format!(
                    "run.ref_init: unknown value '{other}' (expected \"rest\" or {{ kind = \"random\", amplitude = ... }})"
                ));
                ReferenceInit::Rest
            }
        },
        RawInit::Table {
            kind, amplitude, ..
        } => match (kind.as_str(), amplitude) {
            ("random", Some(a)) => ReferenceInit::Random { amplitude: *a },
            ("random", None) => {
                problems.push("run.ref_init: random start needs an amplitude value".into());
                ReferenceInit::Rest
            }
            (other, _) => {
                problems.push(format!("run.ref_init: unknown kind '{other}'"));
                ReferenceInit::Rest
            }
        },
    }
}

fn build_config(raw: &RawFile) -> Result<AssimilationConfig> {
    let mut missing: Vec<&str> = Vec::new();
    let mut problems: Vec<String> = Vec::new();

    let n = raw.grid.as_ref().and_then(|g| g.n);
    let l = raw.grid.as_ref().and_then(|g| g.l);
    let nu = raw.solver.as_ref().and_then(|s| s.nu);
    let dt = raw.solver.as_ref().and_then(|s| s.dt);
    let mu = raw.nudging.as_ref().and_then(|a| a.mu);
    let obs_kind = raw.observer.as_ref().and_then(|o| o.kind.as_deref());
    let h = raw.observer.as_ref().and_then(|o| o.h);

    if n.is_none() {
        missing.push("grid.n");
    }
    if l.is_none() {
        missing.push("grid.l");
    }
    if nu.is_none() {
        missing.push("solver.nu");
    }
    if dt.is_none() {
        missing.push("solver.dt");
    }
    if mu.is_none() {
        missing.push("nudging.mu");
    }
    if obs_kind.is_none() {
        missing.push("observer.kind");
    }
    if h.is_none() {
        missing.push("observer.h");
    }
    if !missing.is_empty() {
        bail!("missing required keys: {}", missing.join(", "));
    }

    let observer = match ObserverKind::parse(obs_kind.unwrap()) {
        Ok(k) => k,
        Err(e) => {
            problems.push(format!("observer.kind: {e}"));
            ObserverKind::FourierModes
        }
    };

    let seed = raw.run.seed.unwrap_or(0);
    let grashof = raw.forcing.grashof.unwrap_or(1.0);
    let forcing = match raw.forcing.kind.as_deref().unwrap_or("kolmogorov") {
        "kolmogorov" => ForcingKind::Kolmogorov,
        "low_mode_random" => ForcingKind::LowModeRandom {
            seed: raw.forcing.seed.unwrap_or(seed),
        },
        other => {
            problems.push(format!(
                "forcing.kind: unknown value '{other}' (expected \"kolmogorov\" or \"low_mode_random\")"
            ));
            ForcingKind::Kolmogorov
        }
    };

    let u0 = match raw.nudging.as_ref().and_then(|a| a.u0.as_ref()) {
        Some(r) => convert_u0(r, &mut problems),
        None => EstimatorInit::Zero,
    };
    let ref_init = match raw.run.ref_init.as_ref() {
        Some(r) => convert_ref_init(r, &mut problems),
        None => ReferenceInit::Rest,
    };

    if !problems.is_empty() {
        bail!("invalid config: {}", problems.join("; "));
    }

    let (l, nu) = (l.unwrap(), nu.unwrap());
    // Viscous-timescale defaults need valid nu and l; when those are bad the
    // validator reports them, so any placeholder works here.
    let visc_time = if l > 0.0 && nu > 0.0 {
        let lambda1 = (2.0 * PI / l).powi(2);
        1.0 / (nu * lambda1)
    } else {
        1.0
    };
    let nudging = raw.nudging.as_ref();
    let cfg = AssimilationConfig {
        n: n.unwrap(),
        l,
        nu,
        dt: dt.unwrap(),
        forcing,
        grashof,
        t_spin: nudging
            .and_then(|a| a.t_spin)
            .unwrap_or(10.0 * visc_time),
        t_assim: nudging
            .and_then(|a| a.t_assim)
            .unwrap_or(20.0 * visc_time),
        mu: mu.unwrap(),
        observer,
        h: h.unwrap(),
        observed_component: nudging.and_then(|a| a.observed_component).unwrap_or(2),
        u0,
        ref_init,
        record_every: nudging.and_then(|a| a.record_every).unwrap_or(10),
        seed,
        c: raw.run.c.unwrap_or(1.0),
        c_tilde: raw.run.c_tilde.unwrap_or(1.0),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Parse and validate a single-run config file.
pub fn parse_config(path: &Path) -> Result<AssimilationConfig> {
    let raw = read_raw(path)?;
    if raw.sweep.is_some() {
        bail!(
            "{} has a [sweep] section; use the sweep command for it",
            path.display()
        );
    }
    build_config(&raw)
}

/// Parse a sweep file: a complete base config plus a [sweep] section with
/// axis lists. Missing axes fall back to the base value.
pub fn parse_sweep(path: &Path) -> Result<SweepSpec> {
    let raw = read_raw(path)?;
    let base = build_config(&raw)?;
    let sw = raw
        .sweep
        .as_ref()
        .with_context(|| format!("{} has no [sweep] section", path.display()))?;
    for (name, empty) in [
        ("mu", sw.mu.as_ref().is_some_and(|v| v.is_empty())),
        ("h", sw.h.as_ref().is_some_and(|v| v.is_empty())),
        ("observer", sw.observer.as_ref().is_some_and(|v| v.is_empty())),
        ("seeds", sw.seeds.as_ref().is_some_and(|v| v.is_empty())),
    ] {
        if empty {
            bail!("sweep.{name} must not be an empty list");
        }
    }
    let observers = match &sw.observer {
        Some(names) => names
            .iter()
            .map(|s| ObserverKind::parse(s).map_err(Into::into))
            .collect::<Result<Vec<_>>>()?,
        None => vec![base.observer],
    };
    Ok(SweepSpec {
        mu: sw.mu.clone().unwrap_or_else(|| vec![base.mu]),
        h: sw.h.clone().unwrap_or_else(|| vec![base.h]),
        observers,
        seeds: sw.seeds.clone().unwrap_or_else(|| vec![base.seed]),
        workers: sw.workers,
        base,
    })
}
