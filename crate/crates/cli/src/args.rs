use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "dirichlet-lab", version, about = "Spectra, chains and simulations of Dirichlet diffusions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML experiment config; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for reports.
    #[arg(long, global = true, env = "DIRICHLET_LAB_OUT")]
    pub out: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Tolerance of the command's assertion.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Full parameter vector `a_1,...,a_N,a_{N+1}`.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Option<Vec<String>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of -L by degree from the matrices, the recursion and the keys.
    Spectrum(SpectrumArgs),
    /// Spectral gap by recursion, cross-checked by eigensolving.
    Gap(SpectrumArgs),
    /// Spectral gap and stationary law of the population chain.
    ChainGap(ChainArgs),
    /// Edge-wise detailed balance of the population chain.
    DetailedBalance(BalanceArgs),
    /// Euler-Maruyama ensemble of the diffusion.
    Simulate(SimulateArgs),
    /// Decay rate of a degree-one eigenfunction from simulation.
    DecayFit(DecayArgs),
    /// Poincare ratios of the degree-one eigenfunctions.
    Poincare(PoincareArgs),
    /// Gap witness and coupling sweep for truncations of the infinite model.
    InfiniteSweep(InfiniteArgs),
    /// Field-wise numeric diff of two reports.
    Diff(DiffArgs),
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub d_max: Option<u32>,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    /// Population size M.
    #[arg(long)]
    pub m: Option<u32>,
    /// Allow M < N + 1.
    #[arg(long)]
    pub relaxed: bool,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Multiply one rate of the first state by `1 + fraction`.
    #[arg(long, allow_hyphen_values = true)]
    pub perturb: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Clamp,
    Reflect,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Record every `stride` steps.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, value_enum)]
    pub boundary: Option<Boundary>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Starting point `x_1,...,x_N`, or `stationary`.
    #[arg(long, value_delimiter = ',')]
    pub x0: Option<Vec<String>>,
    /// Fail unless terminal moments match the stationary ones within 4 SE.
    #[arg(long)]
    pub assert_stationary: bool,
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Which degree-one eigenfunction (1-based; N is the symmetric one).
    #[arg(long)]
    pub eigenfunction: Option<usize>,
    #[arg(long)]
    pub outer: Option<usize>,
    #[arg(long)]
    pub inner: Option<usize>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long)]
    pub t_start: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PoincareArgs {
    /// Monte Carlo sample size; 0 skips the estimate.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct InfiniteArgs {
    /// Geometric family `a_i = c r^i`.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Explicit list `a_1,...,a_K` instead of the geometric family.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long)]
    pub alpha_inf: Option<f64>,
    /// Truncation sizes for the gap witness.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Paths per coupling run; 0 skips the coupling sweep.
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Relative tolerance added to the absolute one.
    #[arg(long)]
    pub rel_tolerance: Option<f64>,
    /// Compare only fields under these paths.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Skip fields under these paths.
    #[arg(long, value_delimiter = ',')]
    pub ignore: Vec<String>,
}
