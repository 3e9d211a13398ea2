use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<wlidoa::Error> for CliError {
    fn from(e: wlidoa::Error) -> Self {
        use wlidoa::Error as E;
        match e {
            E::Solver { reason, .. } => CliError::Solver(reason),
            E::Divergence { .. } | E::IllConditioned(..) => CliError::Solver(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wlidoa", version, about = "Sparse-array DOA estimation by weighted lifted matrix completion")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `scene.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `output.path`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the stdout summary.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize sparse-array observations into a sample file.
    Simulate,
    /// Complete the full array from a sample file.
    Complete { input: PathBuf },
    /// Extract source angles from a completed sample file.
    Doa { input: PathBuf },
    /// Run a Monte-Carlo sweep and write record and summary CSVs.
    Experiment,
}

pub struct Context {
    pub config: RunConfig,
    pub seed: u64,
    pub out: PathBuf,
    pub quiet: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.unwrap_or(config.scene.seed);
    let out = cli
        .out
        .clone()
        .or_else(|| config.output.path.clone())
        .ok_or_else(|| CliError::Config("output.path: no output path given (set it or pass --out)".into()))?;
    let ctx = Context {
        config,
        seed,
        out,
        quiet: cli.quiet,
    };
    match &cli.command {
        Command::Simulate => commands::simulate(&ctx),
        Command::Complete { input } => commands::complete(&ctx, input),
        Command::Doa { input } => commands::doa(&ctx, input),
        Command::Experiment => commands::experiment(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wlidoa: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
