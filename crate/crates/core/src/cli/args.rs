use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use commweights::heuristics::HeuristicId;
use commweights::pep::{AlgorithmId, Criterion};

#[derive(Debug, Parser, Serialize)]
#[command(name = "commweights", version, about = "Communication weights for decentralized optimization")]
pub struct Cli {
    /// Maximum number of concurrent evaluations (defaults to the core count).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Log verbosity: -v for info, -vv for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a topology and write it as graph JSON.
    Graph(GraphArgs),
    /// Compute an averaging matrix with one heuristic.
    Weights(WeightsArgs),
    /// Worst-case value of an algorithm for given weights and step size.
    Evaluate(EvaluateArgs),
    /// Tune the step size for fixed weights.
    TuneAlpha(TuneAlphaArgs),
    /// Jointly tune weights and step size.
    Tune(TuneArgs),
    /// Tune every heuristic's step size and the optimal weights; write a table.
    Compare(CompareArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GraphArgs {
    /// complete, star, cycle, grid or erdos-renyi.
    #[arg(long)]
    pub topology: String,
    #[arg(long)]
    pub n: usize,
    /// Edge probability for erdos-renyi.
    #[arg(long)]
    pub p: Option<f64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct WeightsArgs {
    #[arg(long, value_parser = parse_heuristic)]
    pub heuristic: HeuristicId,
    #[arg(long)]
    pub graph: PathBuf,
    /// Nuclear-norm weights, comma separated, non-increasing (min-nuclear).
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<f64>>,
    /// Resistance regularizer in [0, 1) (min-rtot).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Force one weight per edge orbit in the SDP heuristics.
    #[arg(long)]
    pub orbit_tied: bool,
    /// Weights output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Spectrum output file; defaults to `<out>.spectrum.json` next to `--out`.
    #[arg(long)]
    pub spectrum_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProblemArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_parser = parse_algorithm)]
    pub algorithm: AlgorithmId,
    #[arg(long, value_parser = parse_criterion)]
    pub criterion: Criterion,
    /// Horizon.
    #[arg(long = "K", default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    #[arg(long = "L", default_value_t = 1.0)]
    pub l: f64,
    /// Weight of the auxiliary-state term in the rate metric.
    #[arg(long)]
    pub tracking_weight: Option<f64>,
    /// Bound on the mean squared local gradient at the optimum.
    #[arg(long)]
    pub heterogeneity: Option<f64>,
    /// SDP solver tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    /// Weights JSON as written by `weights` or `tune`.
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TuneAlphaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub weights: PathBuf,
    /// Evaluation budget of the refinement search.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SearchArgs {
    /// Evaluation budget per restart.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub mesh_tol: Option<f64>,
    /// Search one weight per edge instead of one per orbit (non-convex).
    #[arg(long)]
    pub per_edge: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct TuneArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
    /// CSV output file.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON output file; defaults to the CSV path with a `.json` extension.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn parse_heuristic(s: &str) -> Result<HeuristicId, String> {
    s.parse().map_err(|e: commweights::Error| e.to_string())
}

fn parse_algorithm(s: &str) -> Result<AlgorithmId, String> {
    s.parse().map_err(|e: commweights::Error| e.to_string())
}

fn parse_criterion(s: &str) -> Result<Criterion, String> {
    s.parse().map_err(|e: commweights::Error| e.to_string())
}
