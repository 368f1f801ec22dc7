//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when checks ran and failed,
//! 2 on configuration or input errors. `LADDERKIT_LOG` selects the log
//! level (error, warn, info, debug).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Invocation;
use config::{ChainConfig, ConfigError, OutputFormat};

#[derive(Parser)]
#[command(
    name = "ladderkit",
    version,
    about = "Build, verify and spectrally solve factorization chains of second-order difference operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Chain configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Write the primary artifact here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format; overrides the config's output section.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Random seed for verification trials; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every chain-wide residual check and write a JSON report.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare the ladder eigenvalues against the matrix spectrum.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Chain level; defaults to the top level.
        #[arg(long)]
        level: Option<usize>,
    },
    /// Generate the polynomial ladder with its products and standard forms.
    Poly {
        #[command(flatten)]
        common: CommonArgs,
        /// Chain level; defaults to the top level.
        #[arg(long)]
        level: Option<usize>,
        /// Highest polynomial degree; defaults to min(6, grid capacity).
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Emit one level's weight table with its residual metadata.
    Weight {
        #[command(flatten)]
        common: CommonArgs,
        /// Chain level; defaults to the top level.
        #[arg(long)]
        level: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<bool, ConfigError> {
    let common = match &cli.command {
        Command::Verify { common }
        | Command::Spectrum { common, .. }
        | Command::Poly { common, .. }
        | Command::Weight { common, .. } => common,
    };
    let config = ChainConfig::load(&common.config)?;
    let format = common
        .format
        .or(config.output.as_ref().map(|o| o.format))
        .unwrap_or(OutputFormat::Json);
    let out_path = common
        .out
        .clone()
        .or_else(|| config.output.as_ref().and_then(|o| o.path.clone()));
    let inv = Invocation {
        config: &config,
        out: out_path.as_deref(),
        format,
        rng_seed: common.seed.unwrap_or(config.rng_seed),
    };
    match &cli.command {
        Command::Verify { .. } => commands::cmd_verify(&inv),
        Command::Spectrum { level, .. } => commands::cmd_spectrum(&inv, *level),
        Command::Poly { level, degree, .. } => commands::cmd_poly(&inv, *level, *degree),
        Command::Weight { level, .. } => commands::cmd_weight(&inv, *level),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LADDERKIT_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            log::warn!("checks failed; see the report");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
