//! Operator commands for the photoguide engine. Each command returns a
//! [`Report`] holding both a plain-text rendering and a JSON value, so the
//! binary only has to pick one.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use photoguide_core::image::ColorSpace;

mod commands;
mod serve;

pub use commands::{eval, guide, score, stats, stats_report, train};
pub use serve::serve;

pub const STORE_ENV: &str = "PHOTOGUIDE_STORE";
pub const DEFAULT_STORE: &str = "photoguide-store";

#[derive(Debug, Parser)]
#[command(name = "photoguide", version, about = "Photo scoring, shooting guidance and community service")]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score one image on the overall and six attribute dimensions.
    Score(ScoreArgs),
    /// Brightness and composition prompts for one frame.
    Guide(GuideArgs),
    /// Train a network from a dataset manifest and write a checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint against a dataset manifest.
    Eval(EvalArgs),
    /// Run the community HTTP service until interrupted.
    Serve(ServeArgs),
    /// Recompute the before/after and agreement tables and check the quoted figures.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    pub image: PathBuf,
    /// Checkpoint to score with; without one a freshly initialized network is used.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Network input color space. Must match the checkpoint when both are given.
    #[arg(long)]
    pub colorspace: Option<ColorSpace>,
    /// Seed for the untrained network used when no --model is given.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GuideArgs {
    pub image: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Manifest CSV (path plus seven score columns).
    #[arg(long)]
    pub data: PathBuf,
    /// Where to write the checkpoint.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Weight of the attribute loss relative to the overall loss.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub colorspace: Option<ColorSpace>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalSplit {
    /// Every record in the manifest.
    All,
    /// Only the held-out part of the seeded 9:1 split used by `train`.
    Test,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = EvalSplit::All)]
    pub split: EvalSplit,
    /// Split seed; defaults to the seed stored in the checkpoint.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = STORE_ENV, default_value = DEFAULT_STORE)]
    pub store: PathBuf,
    /// Checkpoint used to score uploads and guidance requests.
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Before/after CSV; the bundled transcription when omitted.
    #[arg(long)]
    pub table1: Option<PathBuf>,
    /// Agreement CSV; the bundled transcription when omitted.
    #[arg(long)]
    pub table2: Option<PathBuf>,
    /// Claims TOML; the bundled set when omitted.
    #[arg(long)]
    pub claims: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation: exit code 2.
    Usage(String),
    /// Anything that went wrong while doing the work: exit code 1.
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    pub(crate) fn domain(e: impl fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub json: serde_json::Value,
}

impl Report {
    pub fn render(&self, json: bool) -> String {
        if json {
            serde_json::to_string_pretty(&self.json).expect("report serializes")
        } else {
            self.text.clone()
        }
    }
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Score(a) => score(a),
        Command::Guide(a) => guide(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Serve(a) => serve(a, cli.json),
        Command::Stats(a) => stats(a),
    }
}
