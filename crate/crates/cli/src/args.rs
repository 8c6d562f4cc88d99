use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qsarnet::models::{DecayKind, Hyperparameters, ModelKind};
use qsarnet::trainers::BatchMode;

#[derive(Debug, Parser)]
#[command(
    name = "qsarnet",
    version,
    about = "Neural network regimes for descriptor regression, with resampled benchmarks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic descriptor dataset (CSV plus JSON sidecar).
    Gen(GenArgs),
    /// Train one model on a single train/test split.
    Train(TrainArgs),
    /// Train several models on a shared set of resampled splits.
    Benchmark(BenchmarkArgs),
    /// Paired t-tests and Tukey intervals over a benchmark result.
    Compare(CompareArgs),
    /// Box plots, Tukey interval charts and prediction tables.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: u64,
    #[arg(long, default_value_t = 234, value_parser = clap::value_parser!(u64).range(1..))]
    pub p: u64,
    /// Number of descriptors that enter the target (default min(10, p)).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub informative: Option<u64>,
    /// Standard deviation of the Gaussian noise added to the target.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Weight of the sin·cos interaction term.
    #[arg(long, default_value_t = 0.5)]
    pub nonlinearity: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; defaults to data.csv in the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BatchArg {
    PerObservation,
    FullBatch,
}

impl From<BatchArg> for BatchMode {
    fn from(b: BatchArg) -> Self {
        match b {
            BatchArg::PerObservation => BatchMode::PerObservation,
            BatchArg::FullBatch => BatchMode::FullBatch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecayArg {
    L2,
    Rational,
}

#[derive(Debug, Clone, Args)]
pub struct HyperArgs {
    /// Learning rate (default 0.1; 0.01 for shlffnn).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Training epochs (default 1000).
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Hidden nodes for the one-hidden-layer models (default 5).
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Momentum constant for gdbpmnn (default 0.5).
    #[arg(long)]
    pub momentum: Option<f64>,
    /// Weight-decay strength for bpwdnn (default 1e-4).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Weight-decay penalty for bpwdnn (default l2).
    #[arg(long, value_enum)]
    pub decay: Option<DecayArg>,
    /// Quantile level for qrnn (default 0.5).
    #[arg(long)]
    pub theta: Option<f64>,
    /// qrnn penalty on input-to-hidden weights (default 1e-4).
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// qrnn penalty on weights into the output node (default 1e-4).
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Initial pinball smoothing width for qrnn (default 1e-3).
    #[arg(long)]
    pub smoothing_eps: Option<f64>,
    /// Gradient accumulation (default per-observation).
    #[arg(long, value_enum)]
    pub batch: Option<BatchArg>,
    /// Half-width of the symmetric uniform weight initialisation (default 0.5).
    #[arg(long)]
    pub init_half_width: Option<f64>,
}

impl HyperArgs {
    pub fn to_hyperparameters(&self) -> Hyperparameters {
        Hyperparameters {
            eta: self.eta,
            epochs: self.epochs,
            hidden: self.hidden,
            momentum: self.momentum,
            lambda: self.lambda,
            decay: self.decay.map(|d| match d {
                DecayArg::L2 => DecayKind::L2,
                DecayArg::Rational => DecayKind::Rational,
            }),
            theta: self.theta,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            smoothing_eps: self.smoothing_eps,
            batch_mode: self.batch.map(Into::into),
            init_half_width: self.init_half_width,
        }
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Name of the target column.
    #[arg(long, default_value = "activity")]
    pub target: String,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_parser = parse_model)]
    pub model: ModelKind,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Fraction of rows used for training.
    #[arg(long, default_value_t = 0.76, conflicts_with = "train_count")]
    pub train_fraction: f64,
    /// Exact number of training rows.
    #[arg(long)]
    pub train_count: Option<usize>,
    /// Also range the target on the training rows.
    #[arg(long)]
    pub scale_target: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    RandomSplit,
    KFold,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated model names.
    #[arg(long, value_delimiter = ',', value_parser = parse_model,
          default_value = "shlffnn,gdbpnn,gdbpmnn,bpwdnn,qrnn")]
    pub models: Vec<ModelKind>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Random splits, or repetitions of k-fold cross-validation.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long, value_enum, default_value_t = SchemeArg::RandomSplit)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 0.76)]
    pub train_fraction: f64,
    /// Folds for k-fold cross-validation.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Also range the target on each run's training rows.
    #[arg(long)]
    pub scale_target: bool,
    /// Master seed for splits, initialisation and visiting order.
    #[arg(long)]
    pub seed: u64,
    /// Parallel training jobs (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// benchmark.json written by the benchmark command.
    #[arg(long)]
    pub result: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Simultaneous confidence level of the Tukey intervals.
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Svg,
    Csv,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// benchmark.json written by the benchmark command.
    #[arg(long)]
    pub result: PathBuf,
    /// comparison.json written by the compare command; computed at the
    /// default levels when omitted.
    #[arg(long)]
    pub comparison: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Svg)]
    pub format: FormatArg,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse()
}
