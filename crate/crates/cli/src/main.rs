use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "atfnb",
    version,
    about = "Attribute-weighted naive Bayes with adaptive two-index fusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Impute and ChiMerge-discretize a CSV; writes the coded CSV and the cut map.
    Discretize(DiscretizeArgs),
    /// Fit a model bundle on a CSV.
    Train(TrainArgs),
    /// Predict with a model bundle; reports accuracy when labels are present.
    Predict(PredictArgs),
    /// Repeated-split benchmark, or statistics over a published accuracy table.
    Benchmark(BenchmarkArgs),
    /// Time exact β inference against the grid search on one dataset.
    CompareQsfSls(CompareArgs),
    /// Inspect the optimal β interval of one dataset.
    Qsf(QsfArgs),
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Class column: a header name, a 0-based index, or `last`.
    #[arg(long, default_value = "last")]
    pub class: String,
    /// Extra marker for missing cells (empty cells and `?` are always missing).
    #[arg(long)]
    pub missing: Option<String>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// ChiMerge significance level.
    #[arg(long, default_value_t = atfnb::dataset::DEFAULT_SIGNIFICANCE)]
    pub significance: f64,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct SchemeArgs {
    /// `nb`, `wnb`, `cfw`, `atfnb`, `cfw-beta`, `atfnb-XY`, or `fusion`.
    #[arg(long, default_value = "atfnb")]
    pub scheme: String,
    /// Class-attribute index for `--scheme fusion`.
    #[arg(long)]
    pub ca: Option<String>,
    /// Attribute-attribute index for `--scheme fusion`.
    #[arg(long)]
    pub aa: Option<String>,
    /// A value in [0,1] or `adaptive`, for `--scheme fusion`.
    #[arg(long)]
    pub beta: Option<String>,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct DiscretizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long)]
    pub map_out: PathBuf,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long)]
    pub model_out: PathBuf,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long)]
    pub missing: Option<String>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Predictions CSV; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Table,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct BenchmarkArgs {
    /// Dataset CSVs, each named after its file stem.
    #[arg(long = "data", num_args = 1..)]
    pub data: Vec<PathBuf>,
    /// Class column of every dataset.
    #[arg(long, default_value = "last")]
    pub class: String,
    #[arg(long)]
    pub missing: Option<String>,
    /// Accuracy table instead of training: `table5`, `table9`, or a CSV path.
    #[arg(long)]
    pub from_fixture: Option<String>,
    /// Dataset sizes for the bucket analysis: `uci_meta`, `flavia_meta`, or a CSV path.
    #[arg(long)]
    pub meta: Option<String>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "nb,wnb,cfw,atfnb,cfw-beta"
    )]
    pub algorithms: Vec<String>,
    #[arg(long, default_value_t = 30)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = atfnb::dataset::DEFAULT_TRAIN_FRACTION)]
    pub fraction: f64,
    #[arg(long, default_value_t = atfnb::dataset::DEFAULT_SIGNIFICANCE)]
    pub significance: f64,
    /// Algorithm the W/L counts and the bucket analysis refer to.
    #[arg(long, default_value = "ATFNB")]
    pub reference: String,
    /// Algorithms compared in G/W/L, Wilcoxon and t-test tables (default: all).
    #[arg(long, value_delimiter = ',')]
    pub compare: Vec<String>,
    /// Significance level of the t-test and Wilcoxon test.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Wilcoxon critical value overriding the built-in table.
    #[arg(long)]
    pub critical: Option<u64>,
    /// Ordinary paired t-test instead of the resampling-corrected one.
    #[arg(long)]
    pub plain_t_test: bool,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Report path; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Per-run records as JSON, including wall times.
    #[arg(long)]
    pub records_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "info_gain")]
    pub ca: String,
    #[arg(long, default_value = "pearson")]
    pub aa: String,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct QsfArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "info_gain")]
    pub ca: String,
    #[arg(long, default_value = "pearson")]
    pub aa: String,
    /// Include the raw and normalized index vectors and the pair matrix.
    #[arg(long)]
    pub dump_indexes: bool,
    /// Include every instance's feasible interval.
    #[arg(long)]
    pub dump_intervals: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Discretize(a) => commands::discretize(&a),
        Command::Train(a) => commands::train(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Benchmark(a) => commands::benchmark(&a),
        Command::CompareQsfSls(a) => commands::compare_qsf_sls(&a),
        Command::Qsf(a) => commands::qsf(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
