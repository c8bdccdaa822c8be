//! `mfc0` command-line tool: fit, cluster, generate synthetic data, and run
//! the accuracy and timing benchmarks. Every command writes into `--out` and
//! leaves a `manifest.txt` describing the run.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfc0::bench::{BasisKind, ErrorKind, Method, SweepKind};
use mfc0::{ErrorNorm, YUpdateRule};

#[derive(Debug, Parser)]
#[command(name = "mfc0", version, about = "Multi-subspace analysis by column-l0 constrained factorization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit X, Y, E to a data matrix.
    Fit(FitArgs),
    /// Fit, then cluster samples with normalized cut on Y.
    Cluster(ClusterArgs),
    /// Write a synthetic labeled dataset.
    Synth(SynthArgs),
    /// Clustering accuracy against error ratio.
    Sweep(SweepArgs),
    /// Per-iteration wall time against sample count.
    Timing(TimingArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Data matrix CSV, samples as columns.
    #[arg(long)]
    pub input: PathBuf,
    /// Number of subspaces.
    #[arg(long)]
    pub k: usize,
    /// Dimension of each subspace.
    #[arg(long)]
    pub d0: usize,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value = "none")]
    pub error_norm: ErrorNorm,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "exact")]
    pub y_update: YUpdateRule,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub mu0: f64,
    #[arg(long, default_value_t = 1.2)]
    pub rho: f64,
    #[arg(long, default_value_t = 1e3)]
    pub mu_max: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    /// Hold beta fixed instead of tying it to mu.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Start Y at zero rather than X^T Z.
    #[arg(long)]
    pub cold_start: bool,
    /// Subtract the global minimum before fitting when Z has negative entries.
    #[arg(long)]
    pub min_shift: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    /// Ground-truth labels, one integer per sample.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Toy3d,
    Highdim,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub preset: Preset,
    #[arg(long, default_value = "none")]
    pub error_kind: ErrorKind,
    #[arg(long, default_value_t = 0.0)]
    pub ratio: f64,
    /// Error size; see the error kinds for its meaning.
    #[arg(long)]
    pub magnitude: Option<f64>,
    #[arg(long, default_value = "permutation")]
    pub basis: BasisKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overrides for the highdim preset.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub d0: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub per_subspace: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "corruption,outlier")]
    pub kind: Vec<SweepKind>,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long, default_value = "0:0.8:0.1")]
    pub ratios: String,
    #[arg(long, value_delimiter = ',', default_value = "mfc0,pca,nmf")]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    #[arg(long, default_value = "permutation")]
    pub basis: BasisKind,
    #[arg(long, default_value_t = 0.5)]
    pub lambda_l1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_l21: f64,
    #[arg(long)]
    pub magnitude: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0.95)]
    pub pca_variance: f64,
    #[arg(long, default_value_t = 500)]
    pub nmf_iters: usize,
    /// Overrides for the generator.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub d0: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub per_subspace: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TimingArgs {
    #[arg(long, value_delimiter = ',', default_value = "250,500,1000,2000")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    #[arg(long, default_value_t = 10)]
    pub d0: usize,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fit(args) => commands::fit(&args),
        Command::Cluster(args) => commands::cluster(&args),
        Command::Synth(args) => commands::synth(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::Timing(args) => commands::timing(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
