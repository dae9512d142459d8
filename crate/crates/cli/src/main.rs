//! `geosid`: file-based pipeline from raw check-ins to prompts, rollout
//! scores and evaluation reports.

mod commands;
mod config;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

/// Input that parsed but violates the pipeline's rules; exits with status 1.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct Invalid(pub String);

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "geosid",
    version,
    about = "Next-POI data pipeline with hierarchical spatial-semantic ids"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Pipeline configuration file (TOML). Defaults apply when omitted.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Dataset block of the configuration to operate on.
    #[arg(long, global = true)]
    pub city: Option<String>,
    /// Overrides `output_dir` from the configuration.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Never contact the geocoding endpoint; cache misses get a placeholder.
    #[arg(long, global = true)]
    pub offline: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, filter, segment and split raw check-ins.
    Ingest,
    /// Resolve street addresses for the POI catalog.
    Geocode,
    /// Assign spatial-semantic ids to the POI catalog.
    BuildSid,
    /// Write alignment pairs, training examples and evaluation prompts.
    EmitPrompts,
    /// Score rollouts against the gold labels of a prompt file.
    Score(commands::ScoreArgs),
    /// Group-normalize rewards per prompt.
    Advantages(commands::AdvantagesArgs),
    /// Compute HR@K, NDCG@K and distance errors of ranked predictions.
    Evaluate(commands::EvaluateArgs),
    /// Print dataset statistics of the current split.
    Stats,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// I/O and transport failures map to 2, everything else to 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    use geosid_geocode::GeocodeError;
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return EXIT_VALIDATION;
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
        if let Some(g) = cause.downcast_ref::<GeocodeError>() {
            if matches!(
                g,
                GeocodeError::Transport { .. } | GeocodeError::CacheIo { .. }
            ) {
                return EXIT_IO;
            }
        }
    }
    EXIT_VALIDATION
}
