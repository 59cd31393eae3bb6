use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use nudge2d_cli::commands::{self, BoundsArgs};
use nudge2d_cli::config;
use nudge2d_cli::report;
use nudge2d_cli::verify;

/// Simulator for one-component data assimilation of 2D incompressible flow.
#[derive(Parser)]
#[command(name = "nudge2d", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct OutArg {
    /// Output directory (NUDGE2D_OUT environment variable overrides this).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one assimilation experiment from a config file.
    Run {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArg,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a cross-product parameter sweep from a config with a [sweep] section.
    Sweep {
        /// TOML sweep configuration.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArg,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Override the base config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Allow sweeps larger than the safety limit.
        #[arg(long)]
        override_size: bool,
    },
    /// Evaluate the closed-form gain thresholds and flow-size bounds.
    Bounds {
        /// Viscosity.
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        /// First Stokes eigenvalue (default 1; exclusive with --box-size).
        #[arg(long)]
        lambda1: Option<f64>,
        /// Periodic box size L, setting lambda1 = (2 pi / L)^2.
        #[arg(long)]
        box_size: Option<f64>,
        /// L2 norm of the forcing (default 1; exclusive with --grashof).
        #[arg(long)]
        f_norm: Option<f64>,
        /// Grashof number, setting the forcing norm to G nu^2 lambda1.
        #[arg(long)]
        grashof: Option<f64>,
        /// Theorem constant c.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Flow-size bound constant.
        #[arg(long, default_value_t = 1.0)]
        c_tilde: f64,
        /// Observer approximation constant.
        #[arg(long, default_value_t = 1.0)]
        c0: f64,
        /// Averaging window for the time-averaged bounds.
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        /// Gain at which to evaluate the resolution threshold h_max
        /// (default: the computed typeI Dirichlet gain threshold).
        #[arg(long)]
        mu: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the self-check suite; exits nonzero if any check fails.
    Verify,
    /// Merge run outputs into one long-format CSV for plotting.
    PlotData {
        /// Run directories (each containing a run.csv); the directory name
        /// becomes the run id.
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().cmd {
        Cmd::Run { config, out, seed } => {
            let mut cfg = config::parse_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let record = commands::cmd_run(&cfg, &commands::resolve_out(out.out))?;
            Ok(match record.status.as_str() {
                "ok" => ExitCode::SUCCESS,
                "truncated" => ExitCode::from(2),
                _ => ExitCode::from(1),
            })
        }
        Cmd::Sweep {
            config,
            out,
            workers,
            seed,
            override_size,
        } => {
            let mut spec = config::parse_sweep(&config)?;
            if let Some(s) = seed {
                spec.base.seed = s;
            }
            let records =
                commands::cmd_sweep(&spec, &commands::resolve_out(out.out), workers, override_size)?;
            let ok = records.iter().all(|r| r.status == "ok");
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Cmd::Bounds {
            nu,
            lambda1,
            box_size,
            f_norm,
            grashof,
            c,
            c_tilde,
            c0,
            tau,
            mu,
            out,
        } => {
            let args = BoundsArgs {
                nu,
                lambda1,
                box_size,
                f_norm,
                grashof,
                c,
                c_tilde,
                c0,
                tau,
                mu,
            };
            commands::cmd_bounds(&args, out.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify => {
            let checks = verify::run_all();
            let mut all_ok = true;
            for c in &checks {
                println!(
                    "{:<40} {}  ({})",
                    c.name,
                    if c.passed { "pass" } else { "FAIL" },
                    c.detail
                );
                all_ok &= c.passed;
            }
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::PlotData { runs, out } => {
            let entries: Vec<(String, PathBuf)> = runs
                .iter()
                .map(|dir| {
                    let id = dir
                        .file_name()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| dir.display().to_string());
                    (id, dir.join("run.csv"))
                })
                .collect();
            let out_dir = commands::resolve_out(out.out);
            std::fs::create_dir_all(&out_dir)?;
            let out_file = out_dir.join("plot_data.csv");
            report::emit_plot_data(&out_file, &entries)?;
            println!("plot data written to {}", out_file.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
