//! Run artifacts: series CSV, metadata JSON, sweep summaries, plot data.
//!
//! Numbers are written with Rust's shortest round-trip float formatting, so
//! a given run always serializes to the same bytes and every value re-parses
//! exactly. The plot-data emitter copies value fields verbatim from the
//! source CSV and never reformats them.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result, bail};
use nudge2d::assimilation::{AssimilationConfig, ErrorSeries, RunMetadata};
use serde::Serialize;

pub const SERIES_HEADER: &str = "t,err_l2,err_h1,err_l2_u1,err_l2_u2,energy_ref,energy_da";
pub const PLOT_HEADER: &str = "run_id,t,metric,value";
/// Metric column names, in series-CSV column order.
pub const METRICS: [&str; 6] = [
    "err_l2",
    "err_h1",
    "err_l2_u1",
    "err_l2_u2",
    "energy_ref",
    "energy_da",
];

/// Everything needed to interpret or reproduce one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub run_id: String,
    /// "ok", "truncated" (integration stopped early, partial series kept),
    /// or "failed" (no series produced).
    pub status: String,
    pub series_path: Option<String>,
    pub reference_checkpoint: Option<String>,
    pub estimator_checkpoint: Option<String>,
    /// Least-squares slope of ln(err_l2) over `fit_window`.
    pub fitted_rate: Option<f64>,
    pub fit_r_squared: Option<f64>,
    pub fit_window: Option<(f64, f64)>,
    /// Orders of magnitude between initial and smallest recorded error.
    pub decay_orders: Option<f64>,
    pub final_err_l2: Option<f64>,
    pub wall_seconds: f64,
    pub failure: Option<String>,
    pub config: AssimilationConfig,
    pub metadata: Option<RunMetadata>,
}

impl RunRecord {
    pub fn satisfies_paper(&self) -> Option<bool> {
        self.metadata.as_ref().map(|m| m.satisfies_paper)
    }
}

pub fn write_series_csv(path: &Path, series: &ErrorSeries) -> Result<()> {
    let mut w = BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    writeln!(w, "{SERIES_HEADER}")?;
    for i in 0..series.len() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            series.times[i],
            series.err_l2[i],
            series.err_h1[i],
            series.err_l2_u1[i],
            series.err_l2_u2[i],
            series.energy_ref[i],
            series.energy_da[i],
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Rows of a series CSV with each field kept as its original text.
pub fn read_series_csv(path: &Path) -> Result<Vec<Vec<String>>> {
    let r = BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    );
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h == SERIES_HEADER => {}
        Some(Ok(h)) => bail!("{}: unexpected header '{h}'", path.display()),
        _ => bail!("{}: empty or unreadable", path.display()),
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(str::to_owned).collect();
        if fields.len() != 7 {
            bail!(
                "{} line {}: expected 7 fields, got {}",
                path.display(),
                lineno + 2,
                fields.len()
            );
        }
        rows.push(fields);
    }
    Ok(rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per run: gain, effective resolution, observer, fitted rate,
/// final error, parameter-condition flag, status.
pub fn write_sweep_summary(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    writeln!(
        w,
        "run_id,mu,h_eff,observer,rate,final_err_l2,satisfies_paper,status,wall_seconds"
    )?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.run_id,
            r.config.mu,
            opt(r.metadata.as_ref().map(|m| m.h_eff)),
            r.config.observer.name(),
            opt(r.fitted_rate),
            opt(r.final_err_l2),
            r.satisfies_paper()
                .map(|b| b.to_string())
                .unwrap_or_default(),
            r.status,
            r.wall_seconds,
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Merge run series into one tidy long-format file, rows ordered by run_id
/// then time, metrics in series-column order within a time.
pub fn emit_plot_data(out_file: &Path, runs: &[(String, std::path::PathBuf)]) -> Result<()> {
    if runs.is_empty() {
        bail!("no runs given; nothing to emit");
    }
    let mut ordered: Vec<&(String, std::path::PathBuf)> = runs.iter().collect();
    ordered.sort_by(|a, b| a.0.cmp(&b.0));
    // read everything before creating the output so a bad input leaves no file
    let mut parsed = Vec::with_capacity(ordered.len());
    for (run_id, csv) in &ordered {
        parsed.push((run_id, read_series_csv(csv)?));
    }
    let mut w = BufWriter::new(
        File::create(out_file).with_context(|| format!("creating {}", out_file.display()))?,
    );
    writeln!(w, "{PLOT_HEADER}")?;
    for (run_id, rows) in &parsed {
        for fields in rows {
            for (m, name) in METRICS.iter().enumerate() {
                writeln!(w, "{},{},{},{}", run_id, fields[0], name, fields[m + 1])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
