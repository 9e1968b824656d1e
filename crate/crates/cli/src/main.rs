//! `mkdv`: command-line front end for the mkdv-core library.

// `!(x > 0.0)` rejects NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};

use crate::config::RunConfig;
use crate::output::OutDir;

/// Environment variable overriding the worker thread count.
const THREADS_VAR: &str = "MKDV_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Scattering data on a k grid plus a relation-residual report.
    Scatter,
    /// g-function values on a k grid for each configured ray.
    Phase,
    /// D-function values on a k grid for each configured ray.
    Dfun,
    /// Asymptotic formula over an (x, t) grid.
    Asym,
    /// Direct PDE solve with snapshot output.
    Solve,
    /// Solver against asymptotics with fitted decay rates.
    Compare,
    /// Quick invariant checks for every module.
    Selftest,
}

#[derive(Debug, Parser)]
#[command(
    name = "mkdv",
    version,
    about = "Large-time asymptotics of defocusing mKdV with step-like data"
)]
struct Cli {
    command: Option<Command>,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the invariant checks (same as the `selftest` command).
    #[arg(long)]
    selftest: bool,
    /// Multiplier for absolute tolerances of the band and self checks.
    #[arg(long)]
    tolerance_scale: Option<f64>,
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .parse()
            .with_context(|| format!("{THREADS_VAR} must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    let cfg = cli.config.as_deref().map(RunConfig::load).transpose()?;
    let scale = cli
        .tolerance_scale
        .or(cfg.as_ref().and_then(|c| c.tolerance_scale))
        .unwrap_or(1.0);
    if !(scale > 0.0 && scale.is_finite()) {
        bail!("--tolerance-scale must be positive");
    }
    let command = match (cli.command, cli.selftest) {
        (Some(c), _) => c,
        (None, true) => Command::Selftest,
        (None, false) => bail!("no command given; see --help"),
    };
    if command == Command::Selftest {
        return Ok(selftest::run(scale));
    }
    let Some(cfg) = cfg else {
        bail!("--config is required for this command");
    };
    let dir = cli
        .out
        .or(cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let out = OutDir::create(&dir)?;
    let ok = match command {
        Command::Scatter => commands::scatter(&cfg, &out).map(|_| true)?,
        Command::Phase => commands::phase(&cfg, &out).map(|_| true)?,
        Command::Dfun => commands::dfun(&cfg, &out).map(|_| true)?,
        Command::Asym => commands::asym(&cfg, &out).map(|_| true)?,
        Command::Solve => commands::solve(&cfg, &out).map(|_| true)?,
        Command::Compare => commands::compare_cmd(&cfg, &out, scale)?,
        Command::Selftest => unreachable!(),
    };
    let ok = if cli.selftest {
        selftest::run(scale) && ok
    } else {
        ok
    };
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
