//! `boussinesq`: config-driven experiment runner.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::commands::{Extras, Outcome};
use crate::config::{parse_list, Config};
use crate::error::CliError;
use crate::output::{sha256_hex, OutputDir};

#[derive(Parser, Debug)]
#[command(name = "boussinesq", version, about = "Spectra, observability and boundary control for the good Boussinesq equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// Configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overwrite a non-empty output directory.
    #[arg(long, global = true)]
    force: bool,
    #[arg(long, global = true)]
    modes: Option<usize>,
    #[arg(long = "grid-m", global = true)]
    grid_m: Option<usize>,
    #[arg(long, global = true)]
    horizon: Option<f64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tikhonov parameter of the Gram solve.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Comma-separated amplitudes for `nonlinear`.
    #[arg(long = "radius-sweep", global = true)]
    radius_sweep: Option<String>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenpairs, boundary traces and spectral checks.
    Spectrum,
    /// Leighton-Nehari change of variables.
    TransformCheck,
    /// Finite-difference simulation from the configured initial data.
    Simulate {
        /// Include the `(y^2)_xx` term.
        #[arg(long)]
        nonlinear: bool,
        /// Control samples (`t,u` CSV); zero control when omitted.
        #[arg(long)]
        control: Option<PathBuf>,
    },
    /// Empirical observability constants and gap windows.
    Observe,
    /// Least-norm moment control with modal and FD verification.
    Control,
    /// Fixed-point local control over an amplitude sweep.
    Nonlinear,
    /// Runs every invariant suite on the configured coefficients.
    VerifyAll,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::TransformCheck => "transform-check",
            Command::Simulate { .. } => "simulate",
            Command::Observe => "observe",
            Command::Control => "control",
            Command::Nonlinear => "nonlinear",
            Command::VerifyAll => "verify-all",
        }
    }
}

fn load_config(common: &Common) -> Result<(Config, String), CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Invalid("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigParse {
        line: 0,
        msg: format!("cannot read {}: {e}", path.display()),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut cfg = Config::parse(&text, base)?;
    if let Some(v) = common.modes {
        cfg.modes = v;
    }
    if let Some(v) = common.grid_m {
        cfg.grid_m = v;
    }
    if let Some(v) = common.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = common.dt {
        cfg.dt = v;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = &common.radius_sweep {
        cfg.radius_sweep =
            parse_list(v).map_err(|e| CliError::Invalid(format!("--radius-sweep: {e}")))?;
    }
    Ok((cfg, sha256_hex(text.as_bytes())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let (cfg, config_hash) = load_config(&cli.common)?;
    let mut out = OutputDir::create(&cli.common.out, cli.common.force)?;
    let mut extras = Extras {
        jobs: cli.common.jobs,
        ..Extras::default()
    };
    let Outcome { summary, failure } = match &cli.command {
        Command::Spectrum => commands::spectrum(&cfg, &mut out)?,
        Command::TransformCheck => commands::transform_check(&cfg, &mut out)?,
        Command::Simulate { nonlinear, control } => {
            extras.nonlinear = *nonlinear;
            extras.control_file = control.clone();
            commands::simulate(&cfg, &extras, &mut out)?
        }
        Command::Observe => commands::observe(&cfg, &mut out)?,
        Command::Control => commands::control(&cfg, &mut out)?,
        Command::Nonlinear => commands::nonlinear(&cfg, &extras, &mut out)?,
        Command::VerifyAll => commands::verify_all(&cfg, &mut out)?,
    };
    let root = out.root().display().to_string();
    out.finish(json!({
        "tool": "boussinesq",
        "version": env!("CARGO_PKG_VERSION"),
        "versions": {
            "boussinesq-cli": env!("CARGO_PKG_VERSION"),
            "boussinesq-core": boussinesq_core::VERSION,
        },
        "subcommand": cli.command.name(),
        "config": cli.common.config.as_ref().map(|p| p.display().to_string()),
        "config_sha256": config_hash,
        "seed": cfg.seed,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "status": if failure.is_some() { "failed" } else { "ok" },
    }))?;
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    eprintln!("outputs written to {root}");
    match failure {
        Some(msg) => Err(CliError::Failed(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version requests are not errors
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
