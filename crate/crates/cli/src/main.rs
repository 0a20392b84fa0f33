//! `bfnlab`: approximation, verification and experiment runs on the p-biased cube.

mod commands;
mod experiment;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "bfnlab", version, about = "Sparse-junta approximation and p-biased hypercube experiments")]
pub struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true, env = "BFNLAB_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Approximate a function by a quantized sparse junta.
    Approximate(ApproximateArgs),
    /// Report the properties of an approximation `g` of `f`.
    Verify(VerifyArgs),
    /// Closest junta, FKN or recursive Kindler–Safra approximation at constant p.
    Oracle(OracleArgs),
    /// Branching factor of a hypergraph.
    Bf(BfArgs),
    /// Grid experiments emitting CSV rows or a JSON summary.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Generate a seeded corpus of instances with ground-truth sidecars.
    GenCorpus(GenCorpusArgs),
}

/// Monte Carlo settings used when exact enumeration is out of reach.
#[derive(Args, Debug, Clone)]
pub struct McArgs {
    /// Samples for Monte Carlo estimates (used when more than 24 variables are relevant).
    #[arg(long, default_value_t = 100_000)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ApproximateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub degree: usize,
    /// Target value set, e.g. `0,1`.
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    pub values: String,
    /// Votes per coefficient; derived from the distance to the value set when omitted.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = bfnlab_core::constp::DEFAULT_JUNTA_CAP)]
    pub junta_cap: usize,
    /// Enumerate every restriction instead of sampling.
    #[arg(long)]
    pub exact: bool,
    /// Above this p the closest junta is computed directly.
    #[arg(long, default_value_t = bfnlab_core::sparse::DEFAULT_P0)]
    pub p0: f64,
    #[arg(long, default_value_t = bfnlab_core::constp::DEFAULT_BUDGET)]
    pub budget: u128,
    /// Output function file for `g`.
    #[arg(long)]
    pub out: PathBuf,
    /// Report file; printed to stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Ground truth (a function file or a corpus truth sidecar) to score recovery against.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    pub mc_samples: usize,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long)]
    pub g: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    pub values: String,
    /// Degree of the juntas whose coefficients define quantization (defaults to deg g).
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long, default_value_t = bfnlab_core::constp::DEFAULT_JUNTA_CAP)]
    pub junta_cap: usize,
    /// Also run the converse check on `g`.
    #[arg(long)]
    pub converse: bool,
    #[command(flatten)]
    pub mc: McArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Oracle,
    Ks,
    Fkn,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub degree: usize,
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    pub values: String,
    #[arg(long, default_value_t = bfnlab_core::constp::DEFAULT_JUNTA_CAP)]
    pub junta_cap: usize,
    #[arg(long, value_enum, default_value_t = Method::Oracle)]
    pub method: Method,
    /// Measure for the closest-junta search (the FKN and recursive methods use 1/2).
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Search all tables on every coordinate (n <= 4).
    #[arg(long)]
    pub exhaustive: bool,
    /// Project onto degree <= d under the uniform measure before running FKN.
    #[arg(long)]
    pub project: bool,
    #[arg(long, default_value_t = bfnlab_core::constp::DEFAULT_BUDGET)]
    pub budget: u128,
    /// Function file for the result.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report with the trace; printed to stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BfArgs {
    #[arg(long)]
    pub hypergraph: PathBuf,
    /// Print the witness `(A, k, count)` as JSON instead of the bare value.
    #[arg(long)]
    pub witness: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct ExperimentOut {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ExperimentCommand {
    /// `Pr[f_d ∉ {0,1}]` against `δ = n·p` with log-log slopes.
    Fd(FdArgs),
    /// `E[X^k]` for live-edge counts against the moment bound.
    Moments(MomentsArgs),
    /// Tail probabilities on a grid of thresholds.
    Tail(TailArgs),
    /// Most likely rounded value and the probability of leaving it.
    Bias(BiasArgs),
}

#[derive(Args, Debug)]
pub struct FdArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
    pub degrees: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub delta_min: f64,
    #[arg(long, default_value_t = 0.3)]
    pub delta_max: f64,
    #[arg(long, default_value_t = 6)]
    pub points: usize,
    /// Monte Carlo samples; required when n exceeds 24.
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: ExperimentOut,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    /// Hypergraph files; a seeded random corpus is generated when none are given.
    #[arg(long)]
    pub hypergraph: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1f64])]
    pub p: Vec<f64>,
    /// Largest moment order.
    #[arg(long, default_value_t = 4)]
    pub k: u32,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    #[arg(long, default_value_t = 4.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 20)]
    pub edges: usize,
    #[arg(long, default_value_t = 3)]
    pub max_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo samples; required when a hypergraph has more than 24 vertices.
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[command(flatten)]
    pub out: ExperimentOut,
}

#[derive(Args, Debug)]
pub struct TailArgs {
    /// Tail of the live-edge count of this hypergraph.
    #[arg(long, conflicts_with = "input")]
    pub hypergraph: Option<PathBuf>,
    /// Tail of `|f|` for this function.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub p: f64,
    /// Thresholds; defaults to {1,2,4,8,16} times the coefficient bound.
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Monte Carlo samples; exact enumeration when omitted.
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: ExperimentOut,
}

#[derive(Args, Debug)]
pub struct BiasArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    pub values: String,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: ExperimentOut,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusKind {
    PlantedSparseJunta,
    PerturbedJunta,
    RandomBfHypergraph,
    FdFamily,
}

#[derive(Args, Debug, serde::Serialize)]
pub struct GenCorpusArgs {
    #[arg(long, value_enum)]
    pub kind: CorpusKind,
    /// Number of instances.
    #[arg(long, default_value_t = 10)]
    pub size: usize,
    /// Bound on `E[η²]` for function instances.
    #[arg(long, default_value_t = 1e-3)]
    pub noise: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    /// Measure the noise level refers to.
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    pub values: String,
    /// Branching-factor bound for hypergraph instances.
    #[arg(long, default_value_t = 5.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 30)]
    pub edges: usize,
    #[arg(long, default_value_t = 3)]
    pub max_size: usize,
    /// Directory to create; must be absent or empty.
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => ExitCode::from(output::report_error(&e) as u8),
    }
}
