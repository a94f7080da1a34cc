//! `catnet`: sample KDD99 data, benchmark the ten learners, select one per
//! attack category and run the selected ensemble as a detector.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 selection error,
//! 4 internal error.

mod bench;
mod config;
mod detect;
mod error;
mod fetch;
mod sample;
mod select;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;
use error::{CliError, CliResult, EXIT_INTERNAL, EXIT_OK, EXIT_USAGE};

/// Environment variable naming the default data directory.
pub const DATA_DIR_ENV: &str = "CATNET_DATA_DIR";

#[derive(Parser, Debug)]
#[command(name = "catnet", version, about = "Per-category classifier selection for KDD99 intrusion detection")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for sampling (default 1).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory holding the KDD99 files [default: $CATNET_DATA_DIR, else ./data].
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a seeded stratified training sample and a holdout test set.
    Sample(sample::SampleArgs),
    /// Train and evaluate classifiers, writing a performance table.
    Bench(bench::BenchArgs),
    /// Choose one classifier per attack category from a performance table.
    Select(select::SelectArgs),
    /// Build the selected ensemble and flag connections.
    Detect(detect::DetectArgs),
    /// Download the KDD99 10% training file and verify it.
    FetchData(fetch::FetchArgs),
}

/// Settings shared by every subcommand after merging flags, config and
/// environment.
pub struct Context {
    pub seed: u64,
    pub data_dir: PathBuf,
    pub config: Config,
}

fn run(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let data_dir = cli
        .data_dir
        .or_else(|| config.data_dir.clone())
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"));
    let ctx = Context {
        seed: cli.seed.or(config.seed).unwrap_or(1),
        data_dir,
        config,
    };
    match cli.command {
        Command::Sample(a) => sample::run(&ctx, a),
        Command::Bench(a) => bench::run(&ctx, a),
        Command::Select(a) => select::run(&ctx, a),
        Command::Detect(a) => detect::run(&ctx, a),
        Command::FetchData(a) => fetch::run(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let outcome = std::panic::catch_unwind(|| run(cli));
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("catnet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => {
            eprintln!("catnet: {}", CliError::Internal("unexpected panic".into()));
            ExitCode::from(EXIT_INTERNAL as u8)
        }
    }
}
