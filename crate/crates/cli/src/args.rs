//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "dtg",
    version,
    about = "Median regression and distribution tools for the DT-exponential law"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit an RDTED median regression and print the coefficient table.
    #[command(allow_negative_numbers = true)]
    Fit(FitArgs),
    /// Fitted medians and σ for new rows from a saved model.
    #[command(allow_negative_numbers = true)]
    Predict(PredictArgs),
    /// Evaluate pdf, cdf, sf, hrf, quantile or moment.
    #[command(allow_negative_numbers = true)]
    Dist(DistArgs),
    /// Draw a seeded sample.
    #[command(allow_negative_numbers = true)]
    Sample(SampleArgs),
    /// Quantile residuals of a saved model on a dataset.
    #[command(allow_negative_numbers = true)]
    Residuals(ResidualsArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Positive numeric response column.
    #[arg(long)]
    pub response: String,
    /// Median terms; `1` keeps the default intercept, `0` removes it.
    #[arg(long, num_args = 1.., default_value = "1")]
    pub mu: Vec<String>,
    /// σ terms, same syntax as `--mu`.
    #[arg(long, num_args = 1.., default_value = "1")]
    pub sigma: Vec<String>,
    /// Columns to treat as categorical even when they look numeric.
    #[arg(long, num_args = 1..)]
    pub factor: Vec<String>,
    /// Where to write the fitted model.
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
    /// Optional CSV of per-row fitted values and quantile residuals.
    #[arg(long)]
    pub residuals: Option<PathBuf>,
    /// Directory for qq.svg and worm.svg.
    #[arg(long)]
    pub plots: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Score max-norm required for convergence.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Accepted for symmetry with the simulation commands; fitting is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResidualsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub plots: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistFunction {
    Pdf,
    Cdf,
    Sf,
    Hrf,
    Quantile,
    Moment,
}

/// Either `(β, λ)` or `(μ, σ)`.
#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[arg(value_enum)]
    pub function: DistFunction,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Evaluation points for pdf, cdf, sf and hrf.
    #[arg(long, num_args = 1.., alias = "t")]
    pub x: Vec<f64>,
    /// Probabilities for quantile; the order for moment.
    #[arg(long, num_args = 1..)]
    pub p: Vec<f64>,
    /// Lower end of a truncated moment window.
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Upper end of a truncated moment window; unbounded when absent.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
