use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "rpe",
    version,
    about = "Random projection ensemble dimension reduction for regression",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten, next_help_heading = "Global options")]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct GlobalArgs {
    /// Master random seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads; 0 uses every logical core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// More log output; repeat for more detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Only log errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    /// File of `key=value` lines, read as if each were `--key value`.
    /// Flags on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the projection ensemble on a CSV dataset.
    #[command(args_override_self = true)]
    Fit(FitArgs),
    /// Estimate the number of informative directions.
    #[command(name = "estimate-dim", args_override_self = true)]
    EstimateDim(EstimateDimArgs),
    /// Two-stage estimate of a fixed number of directions.
    #[command(args_override_self = true)]
    Double(DoubleArgs),
    /// Generate a synthetic dataset with known directions.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Run a replicated simulation study.
    #[command(args_override_self = true)]
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args, Clone)]
pub struct DataArgs {
    /// Headed CSV file.
    pub data: PathBuf,

    /// Response column name, or `#k` for the k-th column.
    #[arg(long)]
    pub response: String,

    /// Center and scale every covariate before fitting.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistArg {
    Gaussian,
    Cauchy,
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseArg {
    Lls,
    Qls,
    Nw,
    Mars,
}

/// Ensemble settings; anything left out takes its default.
#[derive(Debug, Args, Clone, Default)]
pub struct RpeArgs {
    /// Number of groups [default: 200].
    #[arg(long = "L", visible_alias = "groups", value_name = "L")]
    pub groups: Option<usize>,

    /// Projections per group [default: 10p].
    #[arg(long = "M", visible_alias = "group-size", value_name = "M")]
    pub group_size: Option<usize>,

    /// Projection dimension [default: ceil(sqrt(p))].
    #[arg(long = "d", visible_alias = "proj-dim", value_name = "D")]
    pub proj_dim: Option<usize>,

    /// Training rows per split [default: ceil(2n/3)].
    #[arg(long = "n1", visible_alias = "train-size", value_name = "N1")]
    pub train_size: Option<usize>,

    /// Projection distribution [default: mixture].
    #[arg(long, value_enum)]
    pub dist: Option<DistArg>,

    /// Probability of a Gaussian matrix under the mixture [default: 0.5].
    #[arg(long = "mix-weight")]
    pub mix_weight: Option<f64>,

    /// Base regressor [default: mars].
    #[arg(long, value_enum)]
    pub base: Option<BaseArg>,

    /// Kernel bandwidth for the Nadaraya-Watson base.
    #[arg(long)]
    pub bandwidth: Option<f64>,

    /// Maximum interaction degree for the spline base.
    #[arg(long = "mars-degree")]
    pub mars_degree: Option<usize>,

    /// Maximum number of forward-pass terms for the spline base.
    #[arg(long = "mars-terms")]
    pub mars_terms: Option<usize>,

    /// GCV penalty per knot for the spline base.
    #[arg(long = "mars-penalty")]
    pub mars_penalty: Option<f64>,
}

#[derive(Debug, Args, Clone)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten, next_help_heading = "Ensemble options")]
    pub rpe: RpeArgs,

    /// Keep every holdout score in report.json.
    #[arg(long = "keep-scores")]
    pub keep_scores: bool,

    /// Also estimate the number of informative directions.
    #[arg(long = "estimate-dim")]
    pub estimate_dim: bool,

    /// Null resamples for dimension estimation.
    #[arg(
        long = "R",
        visible_alias = "resamples",
        value_name = "R",
        default_value_t = 10_000
    )]
    pub resamples: usize,
}

#[derive(Debug, Args, Clone)]
pub struct EstimateDimArgs {
    /// Headed CSV dataset; the ensemble is fitted first.
    #[arg(required_unless_present = "weights", conflicts_with = "weights")]
    pub data: Option<PathBuf>,

    /// Response column name, or `#k` for the k-th column.
    #[arg(long, requires = "data")]
    pub response: Option<String>,

    #[arg(long, requires = "data")]
    pub standardize: bool,

    /// Eigenvalues from an earlier fit (`D.csv`) instead of a dataset. The
    /// ensemble flags must match that fit.
    #[arg(long)]
    pub weights: Option<PathBuf>,

    #[command(flatten, next_help_heading = "Ensemble options")]
    pub rpe: RpeArgs,

    /// Null resamples.
    #[arg(
        long = "R",
        visible_alias = "resamples",
        value_name = "R",
        default_value_t = 10_000
    )]
    pub resamples: usize,
}

#[derive(Debug, Args, Clone)]
pub struct DoubleArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Number of directions to return.
    #[arg(long = "target-dim")]
    pub target_dim: usize,

    /// First-stage settings. The number of groups, training size,
    /// distribution and base regressor carry over to the second stage.
    #[command(flatten, next_help_heading = "Ensemble options")]
    pub rpe: RpeArgs,

    /// Null resamples for the first-stage dimension estimate.
    #[arg(
        long = "R",
        visible_alias = "resamples",
        value_name = "R",
        default_value_t = 10_000
    )]
    pub resamples: usize,
}

#[derive(Debug, Args, Clone)]
pub struct SimulateArgs {
    /// One of 1a, 1b, 1c, 2, ..., 9.
    #[arg(long)]
    pub model: String,

    #[arg(long)]
    pub p: usize,

    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Desk,
    Full,
}

#[derive(Debug, Args, Clone)]
pub struct BenchmarkArgs {
    /// Grid preset.
    #[arg(long, value_enum, default_value_t = PresetArg::Desk)]
    pub preset: PresetArg,

    /// Shorthand for `--preset full`.
    #[arg(long)]
    pub full: bool,

    /// Concurrent cells [default: the thread count].
    #[arg(long)]
    pub workers: Option<usize>,

    /// Override the preset's replicate count.
    #[arg(long)]
    pub replicates: Option<usize>,

    /// Comma-separated models replacing the preset's.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,

    /// Ambient dimension for every model.
    #[arg(long)]
    pub p: Option<usize>,

    /// Sample size for every model.
    #[arg(long)]
    pub n: Option<usize>,

    /// Comma-separated subset of the variants RPE, RPE2, RPE-dim.
    #[arg(long, value_delimiter = ',')]
    pub variants: Option<Vec<String>>,

    /// Settings applied on top of the preset's.
    #[command(flatten, next_help_heading = "Ensemble options")]
    pub rpe: RpeArgs,

    /// Null resamples for the variants that estimate a dimension.
    #[arg(long = "R", visible_alias = "resamples", value_name = "R")]
    pub resamples: Option<usize>,
}
