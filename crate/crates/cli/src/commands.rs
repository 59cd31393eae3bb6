//! The run, sweep, and bounds drivers.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result, bail};
use nudge2d::assimilation::{
    AssimilationConfig, RunOutcome, RunStatus, decay_orders, decaying_window, fit_decay_rate,
    run_assimilation,
};
use nudge2d::bounds::{BoundsReport, PhysicalSetup, bounds_report};
use nudge2d::solver::write_checkpoint;

use crate::config::SweepSpec;
use crate::report::{
    RunRecord, write_json, write_series_csv, write_sweep_summary,
};

/// Largest sweep accepted without an explicit override.
pub const SWEEP_SIZE_LIMIT: usize = 100_000;

fn fit_over_decaying_window(
    series: &nudge2d::assimilation::ErrorSeries,
) -> (Option<f64>, Option<f64>, Option<(f64, f64)>) {
    let Some(window) = decaying_window(series) else {
        return (None, None, None);
    };
    match fit_decay_rate(series, window) {
        Ok(fit) => (Some(fit.rate), Some(fit.r_squared), Some(window)),
        // Fall back to every positive sample when the decaying prefix is
        // too short to regress on (a run that never decays).
        Err(_) => {
            let full = (series.times[0], *series.times.last().unwrap());
            match fit_decay_rate(series, full) {
                Ok(fit) => (Some(fit.rate), Some(fit.r_squared), Some(full)),
                Err(_) => (None, None, None),
            }
        }
    }
}

/// Execute one run and persist its artifacts under `dir`. Model-side
/// failures become a record with status "failed"; only I/O errors abort.
pub fn run_one(cfg: &AssimilationConfig, dir: &Path, run_id: &str) -> Result<RunRecord> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let start = Instant::now();
    let outcome: std::result::Result<RunOutcome, nudge2d::Error> = run_assimilation(cfg);
    let wall = start.elapsed().as_secs_f64();
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            let record = RunRecord {
                run_id: run_id.to_string(),
                status: "failed".into(),
                series_path: None,
                reference_checkpoint: None,
                estimator_checkpoint: None,
                fitted_rate: None,
                fit_r_squared: None,
                fit_window: None,
                decay_orders: None,
                final_err_l2: None,
                wall_seconds: wall,
                failure: Some(e.to_string()),
                config: cfg.clone(),
                metadata: None,
            };
            write_json(&dir.join("run_meta.json"), &record)?;
            return Ok(record);
        }
    };

    let series_path = dir.join("run.csv");
    write_series_csv(&series_path, &outcome.series)?;
    let ref_ckpt = dir.join("final_reference.ckpt");
    let est_ckpt = dir.join("final_estimator.ckpt");
    write_checkpoint(&ref_ckpt, &outcome.reference, outcome.end_time)?;
    write_checkpoint(&est_ckpt, &outcome.estimator, outcome.end_time)?;

    let (rate, r2, window) = fit_over_decaying_window(&outcome.series);
    let (status, failure) = match &outcome.metadata.status {
        RunStatus::Ok => ("ok".to_string(), None),
        RunStatus::Failed { reason, at_time } => (
            "truncated".to_string(),
            Some(format!("{reason} (at t = {at_time})")),
        ),
    };
    let record = RunRecord {
        run_id: run_id.to_string(),
        status,
        series_path: Some(series_path.display().to_string()),
        reference_checkpoint: Some(ref_ckpt.display().to_string()),
        estimator_checkpoint: Some(est_ckpt.display().to_string()),
        fitted_rate: rate,
        fit_r_squared: r2,
        fit_window: window,
        decay_orders: decay_orders(&outcome.series),
        final_err_l2: outcome.series.err_l2.last().copied(),
        wall_seconds: wall,
        failure,
        config: cfg.clone(),
        metadata: Some(outcome.metadata),
    };
    write_json(&dir.join("run_meta.json"), &record)?;
    Ok(record)
}

fn print_run_report(r: &RunRecord) {
    println!("run {}: status {}", r.run_id, r.status);
    if let Some(f) = &r.failure {
        println!("  failure            {f}");
    }
    let Some(meta) = &r.metadata else {
        return;
    };
    println!("  grashof            {}", meta.g);
    let extent = match (meta.cutoff_index, meta.lattice_size) {
        (Some(k), _) => format!("observing |k| <= {k}"),
        (_, Some(m)) => format!("{m}x{m} lattice"),
        _ => String::new(),
    };
    println!(
        "  observer           {} (h_eff {}, {extent})",
        meta.config.observer.name(),
        meta.h_eff
    );
    println!(
        "  c0_hat {:.4}  c0_used {:.4}  mu {}  mu*c0^2*h_eff^2 <= nu: {}",
        meta.c0_hat,
        meta.c0_used,
        meta.config.mu,
        if meta.satisfies_paper { "yes" } else { "no" }
    );
    match (r.fitted_rate, r.fit_r_squared, r.fit_window) {
        (Some(rate), Some(r2), Some((a, b))) => println!(
            "  fitted rate        {rate:.6} (r^2 {r2:.4}, window [{a}, {b}], {} orders of decay)",
            r.decay_orders
                .map(|o| format!("{o:.2}"))
                .unwrap_or_default()
        ),
        _ => println!("  fitted rate        unavailable (no decaying window)"),
    }
    for gc in &meta.gain_checks {
        println!(
            "  gain threshold     {:<18} mu_min {}{}  {}",
            gc.regime,
            gc.mu_min.value,
            if gc.mu_min.domain_warning {
                " (G < 1: log term clamped)"
            } else {
                ""
            },
            if gc.satisfied {
                "met"
            } else {
                "not met"
            }
        );
    }
    println!(
        "  max CFL {:.4}  max divergence ratio {:.3e}  wall {:.2}s",
        meta.max_cfl, meta.max_div_ratio, r.wall_seconds
    );
}

pub fn cmd_run(cfg: &AssimilationConfig, out: &Path) -> Result<RunRecord> {
    let record = run_one(cfg, out, "run")?;
    print_run_report(&record);
    Ok(record)
}

pub fn cmd_sweep(
    spec: &SweepSpec,
    out: &Path,
    workers: Option<usize>,
    override_size: bool,
) -> Result<Vec<RunRecord>> {
    let total = spec.size();
    println!(
        "sweep: {total} runs ({} mu x {} h x {} observer x {} seeds)",
        spec.mu.len(),
        spec.h.len(),
        spec.observers.len(),
        spec.seeds.len()
    );
    if total > SWEEP_SIZE_LIMIT && !override_size {
        bail!(
            "sweep of {total} runs exceeds the {SWEEP_SIZE_LIMIT} limit; pass --override-size to proceed"
        );
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let runs = spec.expand();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.or(spec.workers).unwrap_or(0))
        .build()
        .context("building worker pool")?;
    let records: Result<Vec<RunRecord>> = pool.install(|| {
        use rayon::prelude::*;
        runs.par_iter()
            .map(|(id, cfg)| run_one(cfg, &out.join(id), id))
            .collect()
    });
    let records = records?;
    let summary_path = out.join("sweep_summary.csv");
    write_sweep_summary(&summary_path, &records)?;
    println!(
        "{:<10} {:>8} {:>8} {:<16} {:>12} {:>12} {:>10} {}",
        "run", "mu", "h_eff", "observer", "rate", "final_err", "paper_ok", "status"
    );
    for r in &records {
        println!(
            "{:<10} {:>8} {:>8} {:<16} {:>12} {:>12} {:>10} {}",
            r.run_id,
            r.config.mu,
            r.metadata
                .as_ref()
                .map(|m| format!("{:.4}", m.h_eff))
                .unwrap_or_default(),
            r.config.observer.name(),
            r.fitted_rate
                .map(|v| format!("{v:.4}"))
                .unwrap_or_default(),
            r.final_err_l2
                .map(|v| format!("{v:.3e}"))
                .unwrap_or_default(),
            r.satisfies_paper()
                .map(|b| b.to_string())
                .unwrap_or_default(),
            r.status
        );
    }
    println!("summary written to {}", summary_path.display());
    Ok(records)
}

/// Inputs for the closed-form bound calculator.
#[derive(Debug, Clone)]
pub struct BoundsArgs {
    pub nu: f64,
    pub lambda1: Option<f64>,
    pub box_size: Option<f64>,
    pub f_norm: Option<f64>,
    pub grashof: Option<f64>,
    pub c: f64,
    pub c_tilde: f64,
    pub c0: f64,
    pub tau: f64,
    pub mu: Option<f64>,
}

pub fn cmd_bounds(args: &BoundsArgs, out: Option<&Path>) -> Result<BoundsReport> {
    let lambda1 = match (args.lambda1, args.box_size) {
        (Some(_), Some(_)) => bail!("give either --lambda1 or --box-size, not both"),
        (Some(l1), None) => l1,
        (None, Some(l)) => {
            if !(l > 0.0) {
                bail!("box size must be positive, got {l}");
            }
            (2.0 * std::f64::consts::PI / l).powi(2)
        }
        (None, None) => 1.0,
    };
    let f_norm = match (args.f_norm, args.grashof) {
        (Some(_), Some(_)) => bail!("give either --f-norm or --grashof, not both"),
        (Some(f), None) => f,
        (None, Some(g)) => g * args.nu * args.nu * lambda1,
        (None, None) => 1.0,
    };
    let setup = PhysicalSetup::new(args.nu, lambda1, f_norm)?.with_constants(
        args.c,
        args.c_tilde,
        args.c0,
    )?;
    let report = bounds_report(&setup, args.mu, args.tau)?;

    println!("{:<28} {}", "grashof G", report.g);
    println!("{:<28} {}", "K(G)", report.k);
    for (name, b) in [
        ("mu_min typeI_dirichlet", &report.mu_min_typei_dirichlet),
        ("mu_min typeI_periodic", &report.mu_min_typei_periodic),
        ("mu_min typeII_dirichlet", &report.mu_min_typeii_dirichlet),
        ("mu_min typeII_periodic", &report.mu_min_typeii_periodic),
    ] {
        println!(
            "{:<28} {}{}",
            name,
            b.value,
            if b.domain_warning {
                "  (G < 1: log term clamped at 0)"
            } else {
                ""
            }
        );
    }
    match (report.h_max_at_mu, report.h_max) {
        (Some(mu), Some(h)) => {
            println!("{:<28} {h}  (at mu = {mu})", "h_max");
        }
        _ => println!("{:<28} not computable (mu threshold overflowed)", "h_max"),
    }
    println!("attractor bounds (tau = {}):", report.tau);
    for (name, v) in [
        ("dirichlet L2", &report.attractor.dirichlet_l2),
        ("dirichlet H1", &report.attractor.dirichlet_h1),
        ("dirichlet time-avg H2", &report.attractor.dirichlet_int_h2),
        ("dirichlet H2", &report.attractor.dirichlet_h2),
        ("periodic H1", &report.attractor.periodic_h1),
        ("periodic time-avg H2", &report.attractor.periodic_int_h2),
        ("periodic H2", &report.attractor.periodic_h2),
    ] {
        println!("  {:<26} {}", name, v);
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join("bounds.json");
        write_json(&path, &report)?;
        println!("report written to {}", path.display());
    }
    Ok(report)
}

/// Resolve the output directory: the environment override beats the flag.
pub fn resolve_out(flag: Option<PathBuf>) -> PathBuf {
    std::env::var_os("NUDGE2D_OUT")
        .map(PathBuf::from)
        .or(flag)
        .unwrap_or_else(|| PathBuf::from("out"))
}
