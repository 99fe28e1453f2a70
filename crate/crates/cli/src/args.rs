use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Homological neural networks: TMFG graphs, Hasse diagrams and sparse
/// networks for tabular regression and multivariate forecasting.
#[derive(Debug, Parser)]
#[command(name = "hnn", version)]
pub struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Graph construction and export.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Tabular regression.
    #[command(subcommand)]
    Tabular(TabularCommand),
    /// Multivariate time-series forecasting.
    #[command(subcommand)]
    Ts(TsCommand),
    /// Assemble result tables from run manifests.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    /// Filter a CSV's correlation matrix into a TMFG and export its Hasse diagram.
    Build(GraphBuildArgs),
}

#[derive(Debug, Subcommand)]
pub enum TabularCommand {
    /// Train one architecture on a 70/30 split and save a checkpoint.
    Train(TabularTrainArgs),
    /// Score a checkpoint on a CSV.
    Eval(TabularEvalArgs),
}

#[derive(Debug, Subcommand)]
pub enum TsCommand {
    /// Train the LSTM + sparse-unit forecaster.
    Train(TsTrainArgs),
    /// Score a saved forecaster on the test span of a series.
    Eval(TsEvalArgs),
}

#[derive(Debug, Args)]
pub struct CsvArgs {
    /// Input CSV; relative paths not found locally are looked up in $HNN_DATA_DIR.
    #[arg(long)]
    pub input: PathBuf,
    /// The first row holds values, not column names.
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct GraphBuildArgs {
    #[command(flatten)]
    pub csv: CsvArgs,
    /// Column excluded from the graph.
    #[arg(long)]
    pub target: Option<String>,
    /// `absolute` or `signed` correlation weights.
    #[arg(long, default_value = "absolute")]
    pub similarity: String,
    /// TMFG JSON output.
    #[arg(long)]
    pub out: PathBuf,
    /// Hasse diagram JSON output.
    #[arg(long)]
    pub hasse: Option<PathBuf>,
    /// Hasse diagram Graphviz output.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Manifest path; defaults to `<out stem>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// Training settings shared by the tabular and forecasting commands. Unset
/// flags fall back to the config file, then to built-in defaults.
#[derive(Debug, Args, Default)]
pub struct TrainFlags {
    /// Flat TOML file of settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub architecture: Option<String>,
    #[arg(long)]
    pub similarity: Option<String>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub optimizer: Option<String>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long)]
    pub activation: Option<String>,
    #[arg(long)]
    pub channels: Option<usize>,
    /// Validation fraction (tabular: of the non-test rows; series: of the timeline).
    #[arg(long)]
    pub valid_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TabularTrainArgs {
    #[command(flatten)]
    pub csv: CsvArgs,
    #[arg(long)]
    pub target: String,
    #[command(flatten)]
    pub train: TrainFlags,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Directory for checkpoint, graph, history, metrics and manifest.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TabularEvalArgs {
    #[command(flatten)]
    pub csv: CsvArgs,
    /// Target column; when present the R² is reported.
    #[arg(long)]
    pub target: Option<String>,
    /// Checkpoint written by `tabular train`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Hasse diagram JSON; defaults to `hasse.json` beside the checkpoint.
    #[arg(long)]
    pub hasse: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TsTrainArgs {
    /// Series file, one row per timestep.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub train: TrainFlags,
    #[arg(long)]
    pub lookback: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TsEvalArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Forecaster written by `ts train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Hasse diagram JSON; defaults to `hasse.json` beside the model.
    #[arg(long)]
    pub hasse: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Manifests written by training runs.
    #[arg(long, num_args = 1.., required = true)]
    pub manifests: Vec<PathBuf>,
    /// `csv`, `json` or `markdown`.
    #[arg(long, default_value = "markdown")]
    pub format: String,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
