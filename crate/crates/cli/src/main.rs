//! `ahp-eval`: the evaluation pipeline driven from files.
//!
//! Each subcommand loads the project file, applies one step, and writes the
//! file back. Exit codes: 0 success, 1 other failure, 2 usage, 3 validation,
//! 4 consistency gate, 5 elicitation transport, 6 I/O.

mod commands;
mod error;
mod input;
mod verify;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{DateTime, Utc};
use clap::{Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "ahp-eval", version, about = "Pairwise-comparison weighting and rubric evaluation")]
pub struct Cli {
    /// Project file read and written by every subcommand.
    #[arg(long, global = true, default_value = "project.json")]
    pub project: PathBuf,
    /// Timestamp recorded in the project (RFC 3339); defaults to the clock.
    #[arg(long, global = true)]
    pub now: Option<DateTime<Utc>>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    /// Principal eigenvector by power iteration.
    Eigen,
    /// Normalized row geometric means.
    Geomean,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    /// One prompt simulating the whole panel.
    Single,
    /// One prompt per expert role.
    Multi,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormArg {
    Raw,
    MinMax,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Summary,
    Full,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Create a project from the built-in criteria or a criteria JSON file.
    Init {
        #[arg(long, default_value = "evaluation")]
        name: String,
        /// Criteria set as JSON.
        #[arg(long)]
        criteria: Option<PathBuf>,
        /// Overwrite an existing project file.
        #[arg(long)]
        force: bool,
    },
    /// Import judgments (`Ci Cj intensity` per line) or enter them interactively.
    Judge {
        /// Judgment file; omit to be prompted for each missing pair.
        file: Option<PathBuf>,
    },
    /// Derive weights from the entered judgments.
    Weights {
        #[arg(long, value_enum, default_value = "eigen")]
        method: MethodArg,
        /// Keep weights even when the consistency ratio exceeds the threshold.
        #[arg(long)]
        allow_inconsistent: bool,
        #[arg(long, default_value_t = ahp_eval::consistency::DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Elicit judgments from a language-model expert panel.
    Panel {
        /// Replay recorded replies from this directory instead of calling the model.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Save every live reply as a fixture in this directory.
        #[arg(long, conflicts_with = "fixtures")]
        record: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "single")]
        mode: ModeArg,
        #[arg(long, default_value_t = ahp_eval::panel::DEFAULT_MAX_ROUNDS)]
        max_rounds: usize,
        #[arg(long, default_value_t = ahp_eval::panel::DEFAULT_REFINE_TOP_K)]
        refine_top_k: usize,
        #[arg(long, default_value = "gpt-4o")]
        model: String,
        #[arg(long, default_value_t = ahp_eval::consistency::DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Chat endpoint base URL.
        #[arg(long)]
        base_url: Option<String>,
        /// Environment variable holding the API key.
        #[arg(long, default_value = "OPENAI_API_KEY")]
        api_key_env: String,
        /// Adopt the best round even if it fails the consistency gate.
        #[arg(long)]
        allow_inconsistent: bool,
    },
    /// Import rubric scores (`Ci | score | evidence | ref1; ref2`) for one alternative.
    Score {
        alternative: String,
        file: PathBuf,
        #[arg(long, value_enum, default_value = "raw")]
        normalization: NormArg,
    },
    /// Compute composites and profiles for every scored alternative.
    Aggregate,
    /// Sweep each criterion weight and report rank reversals.
    Sensitivity {
        #[arg(long, default_value_t = ahp_eval::sensitivity::DEFAULT_RANGE)]
        range: f64,
        #[arg(long, default_value_t = ahp_eval::sensitivity::DEFAULT_STEPS)]
        steps: usize,
    },
    /// Write the evaluation report and radar-chart data.
    Report {
        #[arg(long, value_enum, default_value = "summary")]
        kind: KindArg,
        /// Report file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Chart data JSON file.
        #[arg(long)]
        chart_out: Option<PathBuf>,
    },
    /// Check the built-in reference matrix and case studies against published values.
    VerifyPaper,
    /// Run the HTTP session service.
    Serve {
        /// TOML configuration file; `AHP_*` variables and these flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        listen: Option<SocketAddr>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
