//! `apltune`: generate, measure, tune and simulate networks from the shell.
//!
//! Exit status is 0 on success, 2 for usage errors (bad flags, missing or
//! malformed input files, invalid parameter values) and 1 when a valid
//! request fails at run time.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use apltune::majority::UpdateScheme;
use apltune::tuner::AplMode;

#[derive(Debug, Parser)]
#[command(
    name = "apltune",
    version,
    about = "Average-path-length tuning and majority-rule dynamics"
)]
pub struct Cli {
    /// Master seed; a random one is chosen and printed when omitted.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a ring lattice or Watts–Strogatz graph as an edge list.
    Generate(GenerateArgs),
    /// Print "N M L C min_deg max_deg" for an edge list.
    Measure(MeasureArgs),
    /// Rewire a graph towards a target average path length.
    Tune(TuneArgs),
    /// Run the majority rule and write the density trace.
    Simulate(SimulateArgs),
    /// Run a bifurcation sweep described by a JSON file.
    Sweep(SweepArgs),
    /// Re-run the command recorded in a manifest and check its outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Ws,
    Ring,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    #[arg(long)]
    pub n: usize,
    /// Neighbors on each side; the degree is 2k.
    #[arg(long)]
    pub k: usize,
    /// Rewiring probability (ws only).
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Write the distance distribution P(d) as CSV.
    #[arg(long)]
    pub dist: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub target_apl: f64,
    #[arg(long, default_value_t = 10.0)]
    pub temp0: f64,
    #[arg(long, default_value_t = 0.9)]
    pub cool_factor: f64,
    #[arg(long, default_value_t = 200)]
    pub cool_interval: u64,
    #[arg(long, default_value_t = 0.005)]
    pub tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_proposals: u64,
    #[arg(long, default_value_t = 10_000)]
    pub plateau_window: u64,
    /// `exact` or `sampled:S`.
    #[arg(long, default_value = "exact")]
    pub apl_mode: AplMode,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-proposal CSV trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub d0: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value = "sync")]
    pub scheme: UpdateScheme,
    /// Density trace CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Keep the full state every this many steps.
    #[arg(long, requires = "snapshots")]
    pub snapshot_every: Option<usize>,
    /// One line of 0/1 characters per snapshot.
    #[arg(long, requires = "snapshot_every")]
    pub snapshots: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Parses `argv` (without the program name) and runs the command.
pub fn run(argv: Vec<OsString>) -> CliResult<()> {
    let full = std::iter::once(OsString::from("apltune")).chain(argv.iter().cloned());
    let cli = match Cli::try_parse_from(full) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => {
            return Err(CliError::Usage(
                e.render().to_string().trim_end().to_string(),
            ))
        }
    };
    commands::dispatch(cli, argv)
}

fn main() -> ExitCode {
    match run(std::env::args_os().skip(1).collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) if msg.starts_with("error:") => eprintln!("{msg}"),
                CliError::Usage(msg) | CliError::Runtime(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
