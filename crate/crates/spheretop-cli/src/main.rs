//! `spheretop`: verification, simulation, sections, curvature, and geodesic
//! reports for the cubic-integral Hamiltonian family on the sphere.
//!
//! Exit codes: 0 success, 1 verification failure, 2 config error,
//! 3 runtime/integrator error. `SPHERETOP_THREADS` caps worker concurrency.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::CmdError;
use config::{Overrides, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "spheretop", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration (defaults used when absent).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default: current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Random seed for sampling (default 42).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Shape parameter override (must satisfy s > 1).
    #[arg(long = "s", global = true)]
    s: Option<f64>,

    /// Trigonometric coupling override.
    #[arg(long = "A", global = true)]
    a: Option<f64>,

    /// 1/W coupling override.
    #[arg(long = "c", global = true)]
    c: Option<f64>,

    /// Geodesic energy parameter override.
    #[arg(long = "h", global = true)]
    h: Option<f64>,

    /// Integrator step override.
    #[arg(long, global = true)]
    dt: Option<f64>,

    /// Integration horizon override.
    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full verification battery and emit a JSON report.
    Verify,
    /// Integrate one trajectory and export CSV/JSON with a drift summary.
    Simulate,
    /// Compute Poincaré sections for the configured seeds.
    Section,
    /// Export curvature profiles and positivity reports.
    Curvature,
    /// Build the Maupertuis geodesic systems and the correspondence report.
    Geodesic,
}

fn run(cli: Cli) -> Result<(), CmdError> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    config.apply(&Overrides {
        seed: cli.seed,
        s: cli.s,
        a: cli.a,
        c: cli.c,
        h: cli.h,
        dt: cli.dt,
        t_end: cli.t_end,
        out: cli.out.clone(),
    });
    commands::preflight(&config)?;
    match cli.command {
        Command::Verify => commands::cmd_verify(&config),
        Command::Simulate => commands::cmd_simulate(&config),
        Command::Section => commands::cmd_section(&config),
        Command::Curvature => commands::cmd_curvature(&config),
        Command::Geodesic => commands::cmd_geodesic(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
