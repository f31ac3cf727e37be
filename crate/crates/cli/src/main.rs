//! `crawlerlab`: simulation, bifurcation, slow-fast and harmonic-balance
//! analyses of the crawler model from a JSON run configuration.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Parser, Subcommand};
use crawlerlab_core::Error;

use commands::Context;
use config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "crawlerlab", version, about = "Analyses of an excitable two-segment crawler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the full model; writes trajectory.csv and metrics.json.
    Simulate(Args),
    /// Hopf and pitchfork analysis; writes bifurcation.json.
    Bifurcate(Args),
    /// Folds and folded singularities; writes fold.json.
    Gsp(Args),
    /// Relay harmonic balance; writes hb_sweep.csv and hb_optimum.json.
    Hb(Args),
    /// Grid sweep over groups; writes sweep.csv.
    Sweep(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fail when a modelling assumption is violated.
    #[arg(long)]
    strict: bool,
    /// Absolute integration tolerance.
    #[arg(long)]
    tol_abs: Option<f64>,
    /// Relative integration tolerance.
    #[arg(long)]
    tol_rel: Option<f64>,
}

fn context(args: &Args) -> anyhow::Result<Context> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(abs) = args.tol_abs {
        cfg.tolerances.abs = abs;
    }
    if let Some(rel) = args.tol_rel {
        cfg.tolerances.rel = rel;
    }
    let (abs, rel) = (cfg.tolerances.abs, cfg.tolerances.rel);
    if !(abs > 0.0 && rel > 0.0 && abs.is_finite() && rel.is_finite()) {
        return Err(ConfigError(format!("tolerances must be positive, got abs {abs}, rel {rel}")).into());
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| ConfigError("no output directory: pass --out or set `out`".into()))?;
    std::fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    Ok(Context { cfg, out, strict: args.strict })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (args, f): (&Args, fn(&Context) -> anyhow::Result<()>) = match &cli.command {
        Command::Simulate(a) => (a, commands::simulate::run),
        Command::Bifurcate(a) => (a, commands::bifurcate::run),
        Command::Gsp(a) => (a, commands::gsp::run),
        Command::Hb(a) => (a, commands::hb::run),
        Command::Sweep(a) => (a, commands::sweep::run),
    };
    f(&context(args)?)
}

/// 2 for configuration problems, 1 for numerical failures.
fn exit_code(e: &anyhow::Error) -> u8 {
    if e.is::<ConfigError>() {
        return 2;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::InvalidParameter { .. } | Error::Json(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
