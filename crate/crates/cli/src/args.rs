use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use evprofile::classifiers::ModelKind;
use evprofile::extraction::TailParams;
use serde::Serialize;

/// Profiling of electric vehicles from charging-session time series.
#[derive(Debug, Parser)]
#[command(name = "evprofile", version)]
pub struct Cli {
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn log_level(&self) -> &'static str {
        match self.verbose {
            0 => "warn",
            1 => "info",
            _ => "debug",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read canonical or ACN session files into a fleet artifact.
    Ingest(IngestArgs),
    /// Generate a synthetic fleet with ground truth.
    Synth(SynthArgs),
    /// Locate tails and Delta series.
    Extract(ExtractArgs),
    /// Compute feature vectors from extracted tails.
    Featurize(FeaturizeArgs),
    /// Per-EV profiling at one or more Q values.
    Evaluate(EvaluateArgs),
    /// Parameter sweeps.
    #[command(subcommand)]
    Sweep(SweepCommand),
    /// Modern versus legacy feature pipeline on the same splits.
    CompareLegacy(CompareArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TailArgs {
    /// Moving-average window in samples.
    #[arg(long, default_value_t = 25)]
    pub n_avg: usize,
    /// Largest forward rise still counted as tail.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Consecutive rises that end the backward walk.
    #[arg(long, default_value_t = 10)]
    pub t_max: usize,
    /// Steady-zero threshold in amperes.
    #[arg(long, default_value_t = 0.1)]
    pub zeta: f64,
    /// Shortest tail kept (default: the window length).
    #[arg(long)]
    pub min_tail_len: Option<usize>,
}

impl TailArgs {
    pub fn params(&self) -> TailParams {
        TailParams {
            n_avg: self.n_avg,
            epsilon: self.epsilon,
            t_max: self.t_max,
            zero_threshold: self.zeta,
            min_tail_len: self.min_tail_len.unwrap_or(self.n_avg),
        }
    }
}

#[derive(Debug, Args, Serialize)]
#[group(id = "source", required = true, multiple = false, args = ["acn", "canonical"])]
pub struct IngestArgs {
    /// ACN-Data session documents (API response, array, or one per line).
    #[arg(long)]
    pub acn: Option<PathBuf>,
    /// Canonical line-delimited session file.
    #[arg(long)]
    pub canonical: Option<PathBuf>,
    /// Drop sessions connected after this instant (RFC 3339 or YYYY-MM-DD).
    #[arg(long)]
    pub cutoff: Option<String>,
    /// Keep EVs with at least this many tailed sessions.
    #[arg(long, default_value_t = evprofile::data_model::DEFAULT_MIN_TAILED_SESSIONS)]
    pub min_tailed: usize,
    /// Skip eligibility filtering.
    #[arg(long)]
    pub no_filter: bool,
    #[command(flatten)]
    pub tail: TailArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 20)]
    pub evs: usize,
    #[arg(long, default_value_t = 30)]
    pub sessions: usize,
    /// Signature spread; 0 makes every EV identical.
    #[arg(long, default_value_t = 1.0)]
    pub spread: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sampling period in seconds.
    #[arg(long, default_value_t = evprofile::synth::DEFAULT_PERIOD_S)]
    pub period: f64,
    /// Chance a session ends before its tail.
    #[arg(long, default_value_t = 0.0)]
    pub early_departure: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExtractArgs {
    #[arg(long)]
    pub fleet: PathBuf,
    #[command(flatten)]
    pub tail: TailArgs,
    /// Also write a per-session summary table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FeaturizeArgs {
    #[arg(long)]
    pub tails: PathBuf,
    /// The 18-entry legacy feature set instead of the full catalog.
    #[arg(long)]
    pub legacy: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Options shared by every profiling run.
#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    #[arg(long, default_value = "knn", value_parser = parse_model)]
    pub model: ModelKind,
    /// Repetitions per EV (default: 25 for rf and ada, 100 otherwise).
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = evprofile::evaluation::profiling::DEFAULT_TRAIN_FRACTION)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = evprofile::classifiers::DEFAULT_FOLDS)]
    pub folds: usize,
    /// Report table (CSV).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: evprofile::Error| e.to_string())
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub q: Vec<f64>,
    #[arg(long, default_value_t = evprofile::evaluation::DEFAULT_NOF)]
    pub nof: usize,
    /// Per-EV results and skipped EVs (line-delimited JSON).
    #[arg(long)]
    pub details: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SweepCommand {
    /// F1 against the number of selected features.
    Nof(SweepNofArgs),
    /// F1 against the number of training vectors per EV.
    TrainSize(SweepTrainSizeArgs),
    /// F1 against the unbalancing ratio.
    Q(SweepQArgs),
    /// F1 over consecutive time windows after training.
    Degradation(SweepDegradationArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SweepNofArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_delimiter = ',', default_value = "10,25,50,100,150,200")]
    pub nof_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,5")]
    pub q: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepTrainSizeArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_delimiter = ',', default_value = "7,14,21,28,35,42,49,56")]
    pub sizes: Vec<usize>,
    /// EVs with fewer vectors are left out.
    #[arg(long, default_value_t = 70)]
    pub min_vectors: usize,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = evprofile::evaluation::DEFAULT_NOF)]
    pub nof: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,5")]
    pub q: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepQArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub q: Vec<f64>,
    #[arg(long, default_value_t = evprofile::evaluation::DEFAULT_NOF)]
    pub nof: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepDegradationArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.6")]
    pub train_fractions: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub windows: usize,
    /// Targets: the EVs with the most vectors.
    #[arg(long, default_value_t = 10)]
    pub top_n: usize,
    #[arg(long, default_value_t = 150)]
    pub min_vectors: usize,
    #[arg(long, default_value_t = evprofile::evaluation::DEFAULT_NOF)]
    pub nof: usize,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub q: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Full-catalog feature table.
    #[arg(long)]
    pub features: PathBuf,
    /// Legacy feature table of the same sessions.
    #[arg(long)]
    pub legacy_features: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = evprofile::evaluation::DEFAULT_NOF)]
    pub nof: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub q: Vec<f64>,
}
