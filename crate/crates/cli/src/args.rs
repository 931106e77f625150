use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

/// Dialog dataset construction and Big-Five personality prediction.
#[derive(Debug, Parser)]
#[command(name = "duplex", version, propagate_version = true)]
pub struct Cli {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Run seed; overrides `rng_seed` from the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Directory receiving every output of the command.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out_dir: PathBuf,

    /// Worker threads for per-conversation work (default: logical CPUs).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// More log output on stderr; repeat for debug level.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

/// Chat and classifier backends.
#[derive(Debug, Args, Clone)]
pub struct ServiceArgs {
    /// Use the offline rule-based services instead of remote endpoints.
    #[arg(long)]
    pub mock: bool,

    /// Chat-completion base URL; overrides the configuration and `DUPLEX_ENDPOINT`.
    #[arg(long, value_name = "URL")]
    pub endpoint: Option<String>,

    /// Chat model name.
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic transcripts with ground-truth sidecars.
    Synth {
        /// Number of conversations.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Event-rate profile (TOML); defaults to the built-in profile.
        #[arg(long, value_name = "FILE", conflicts_with = "no_overlap")]
        profile: Option<PathBuf>,
        /// Generate conversations without any overlapping speech.
        #[arg(long)]
        no_overlap: bool,
    },
    /// Turn transcripts into dialog datasets.
    Annotate {
        #[command(flatten)]
        services: ServiceArgs,
        /// Transcript files or directories of `*.json` transcripts.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Per-speaker attributes and cohort buckets for a batch of datasets.
    Attributes {
        /// Dataset files or directories of `*.jsonl` datasets.
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
    },
    /// Predict Big-Five scores for every speaker of the attribute table.
    Predict {
        #[command(flatten)]
        services: ServiceArgs,
        /// Prompt sections to include, comma separated.
        #[arg(long, default_value = "samples,basics,emotion,sentiment")]
        features: String,
        /// Output directory of the `attributes` command.
        #[arg(long, value_name = "DIR")]
        attributes: PathBuf,
        /// Dataset files or directories of `*.jsonl` datasets.
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
    },
    /// Score predictions against the trend table and reference labels.
    Eval {
        /// Prediction file written by `predict`.
        #[arg(long, value_name = "FILE")]
        predictions: PathBuf,
        /// Reference labels in the prediction file format.
        #[arg(long, value_name = "FILE")]
        human: Option<PathBuf>,
        /// Output directory of the `attributes` command, for the trend score.
        #[arg(long, value_name = "DIR")]
        attributes: Option<PathBuf>,
        /// Trend table CSV replacing the bundled one.
        #[arg(long, value_name = "FILE")]
        trend_table: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Annotate { .. } => "annotate",
            Command::Attributes { .. } => "attributes",
            Command::Predict { .. } => "predict",
            Command::Eval { .. } => "eval",
        }
    }
}
