//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pwca_core::{KernelSpec, Method};

/// Pairwise cluster analysis for aligned multi-view data.
///
/// Set PWCA_THREADS to cap internal parallelism (0 or unset = all cores).
#[derive(Debug, Parser)]
#[command(name = "pwca", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a PWCA or KCCA model on aligned training views.
    Train(TrainArgs),
    /// Mate retrieval from one test view into another.
    Eval(EvalArgs),
    /// Train both methods on one dataset and tabulate AP per view pair.
    Compare(CompareArgs),
    /// Generate a synthetic aligned dataset with known mates.
    Synth(SynthArgs),
    /// Evaluate the PAC-Bayes bound for given n, δ and KL(Q, P).
    Bound(BoundArgs),
    /// Realizable pairwise clustering over a uniform grid of intervals.
    GridDemo(GridDemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Pwca,
    Kcca,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Pwca => Method::Pwca,
            MethodArg::Kcca => Method::Kcca,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Linear,
    Rbf,
}

/// Kernel flags shared by `train` and `compare`.
#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Kernel function.
    #[arg(long, value_enum, default_value = "linear")]
    pub kernel: KernelArg,

    /// RBF bandwidth h in exp(-|x-y|²/(2h²)); required with --kernel rbf.
    #[arg(long)]
    pub bandwidth: Option<f64>,

    /// Center kernels in feature space.
    #[arg(long)]
    pub center: bool,
}

impl KernelArgs {
    pub fn spec(&self) -> KernelSpec {
        let spec = match self.kernel {
            KernelArg::Linear => KernelSpec::linear(),
            KernelArg::Rbf => KernelSpec::rbf(self.bandwidth.unwrap_or(f64::NAN)),
        };
        if self.center {
            spec.centered()
        } else {
            spec
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training view files, one per view (at least two), rows aligned.
    #[arg(long, num_args = 2.., required = true)]
    pub views: Vec<PathBuf>,

    /// Training method.
    #[arg(long, value_enum, default_value = "pwca")]
    pub method: MethodArg,

    /// Diagonal regularization τ (> 0).
    #[arg(long, default_value_t = 0.01)]
    pub tau: f64,

    /// Components to keep [default: min(training rows, 100)].
    #[arg(long)]
    pub k: Option<usize>,

    #[command(flatten)]
    pub kernel: KernelArgs,

    /// Output model file (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,

    /// Test view files in training view order, rows aligned.
    #[arg(long, num_args = 2.., required = true)]
    pub test: Vec<PathBuf>,

    /// Index (0-based) of the view the queries come from.
    #[arg(long, default_value_t = 0)]
    pub query_view: usize,

    /// Index (0-based) of the view searched for mates.
    #[arg(long, default_value_t = 1)]
    pub target_view: usize,

    /// Output summary (JSON).
    #[arg(long)]
    pub report: PathBuf,

    /// Output per-query ranks (CSV) [default: report path with .csv extension].
    #[arg(long)]
    pub ranks: Option<PathBuf>,

    /// Seed recorded in the report for provenance.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Training view files, rows aligned.
    #[arg(long, num_args = 2.., required = true)]
    pub train: Vec<PathBuf>,

    /// Test view files in the same view order, rows aligned.
    #[arg(long, num_args = 2.., required = true)]
    pub test: Vec<PathBuf>,

    /// Diagonal regularization τ (> 0), shared by both methods.
    #[arg(long, default_value_t = 0.01)]
    pub tau: f64,

    /// Components to keep [default: min(training rows, 100)].
    #[arg(long)]
    pub k: Option<usize>,

    #[command(flatten)]
    pub kernel: KernelArgs,

    /// Output table (CSV): one row per method, one column per view pair plus the mean.
    #[arg(long)]
    pub out: PathBuf,

    /// Output per-direction AP (CSV).
    #[arg(long)]
    pub directions: Option<PathBuf>,

    /// Seed recorded for provenance.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of aligned samples.
    #[arg(long, default_value_t = 700)]
    pub l: usize,

    /// Number of views; must match the length of --dims.
    #[arg(long, default_value_t = 2)]
    pub views: usize,

    /// Latent dimension p (<= every view dimension).
    #[arg(long, default_value_t = 20)]
    pub latent: usize,

    /// Comma-separated feature dimension of each view.
    #[arg(long, value_delimiter = ',', default_value = "50,60")]
    pub dims: Vec<usize>,

    /// Noise standard deviation σ (>= 0).
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,

    /// Generator seed.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Comma-separated per-view map seeds [default: derived from --seed].
    #[arg(long, value_delimiter = ',')]
    pub map_seeds: Option<Vec<u64>>,

    /// Also write a train/ split with this many rows.
    #[arg(long)]
    pub n_train: Option<usize>,

    /// Rows in the test/ split [default: all rows not used for training].
    #[arg(long, requires = "n_train")]
    pub n_test: Option<usize>,

    /// Split seed [default: --seed].
    #[arg(long, requires = "n_train")]
    pub split_seed: Option<u64>,

    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Sample size (>= 8).
    #[arg(long)]
    pub n: usize,

    /// Confidence parameter δ in (0, 1).
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,

    /// KL(Q, P) of the posterior weighting against the prior.
    #[arg(long)]
    pub kl: f64,

    /// Empirical risk E_Q[R_n] to invert into a true-risk upper bound.
    #[arg(long, default_value_t = 0.0)]
    pub emp_risk: f64,
}

#[derive(Debug, Args)]
pub struct GridDemoArgs {
    /// Intervals per domain.
    #[arg(long, default_value_t = 5)]
    pub cells: usize,

    /// Samples (CSV with columns z,y; a non-numeric first line is a header).
    #[arg(long)]
    pub samples: PathBuf,

    /// Risk tolerance ε; hypotheses with empirical risk <= ε are kept.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,

    /// Lower grid edge in both domains.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lo: f64,

    /// Upper grid edge in both domains.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub hi: f64,

    /// Confidence parameter δ for the reported bound.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,

    /// Output per-hypothesis risks and weights (CSV).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
