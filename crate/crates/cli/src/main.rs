//! `qwalk`: run quantum-walk experiments from a JSON config and write CSV
//! data plus a JSON manifest.
//!
//! Exit codes: 0 success, 2 invalid input, 3 file-system failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Report;
use crate::config::{Overrides, RunConfig, Setup};
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "qwalk",
    version,
    about = "Discrete-time quantum walks on bounded graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entanglement series and position heatmap
    Simulate(Common),
    /// Eigenvalues, periodicity classification and predicted period
    Spectrum(Common),
    /// Entanglement series for two coin biases from the same start
    Sensitivity {
        #[command(flatten)]
        common: Common,
        /// Second coin bias
        #[arg(long)]
        delta_b: Option<f64>,
    },
    /// Meyer-Wallach series for one walker and for two photons
    TwoWalker(Common),
    /// Linear-optics circuit for one step, checked against the step matrix
    ExportCircuit(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; defaults apply when omitted
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = "qwalk-out")]
    out: PathBuf,
    /// Number of time steps (t_max)
    #[arg(long, value_name = "N")]
    steps: Option<usize>,
    /// Line graph size |G|
    #[arg(long, value_name = "N")]
    size: Option<usize>,
    /// Hadamard coin bias
    #[arg(long, value_name = "X")]
    delta: Option<f64>,
    /// Largest denominator for rational phase detection
    #[arg(long, value_name = "N")]
    qmax: Option<u64>,
    /// Tolerance for rational phase detection
    #[arg(long, value_name = "X")]
    eps: Option<f64>,
}

fn load(common: &Common, delta_b: Option<f64>) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        steps: common.steps,
        size: common.size,
        delta: common.delta,
        delta_b,
        q_max: common.qmax,
        eps: common.eps,
    })?;
    Ok(cfg)
}

type Runner = fn(&RunConfig, &Setup, &Path) -> Result<Report, CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common, delta_b, runner): (&str, Common, Option<f64>, Runner) = match cli.command {
        Command::Simulate(c) => ("simulate", c, None, commands::simulate),
        Command::Spectrum(c) => ("spectrum", c, None, commands::spectrum),
        Command::Sensitivity { common, delta_b } => {
            ("sensitivity", common, delta_b, commands::sensitivity)
        }
        Command::TwoWalker(c) => ("two-walker", c, None, commands::two_walker),
        Command::ExportCircuit(c) => ("export-circuit", c, None, commands::export),
    };
    let cfg = load(&common, delta_b)?;
    let setup = cfg.prepare()?;
    let dir = &common.out;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;

    let report = runner(&cfg, &setup, dir)?;
    let extra = commands::write_manifest(dir, name, &cfg, &setup.graph, &report)?;
    for path in report.outputs.iter().chain(&extra) {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qwalk: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
