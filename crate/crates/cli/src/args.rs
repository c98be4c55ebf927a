use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use delrate::bounds::BoundKind;

#[derive(Debug, Parser)]
#[command(
    name = "delrate",
    version,
    about = "Rate bounds and estimates for the binary deletion channel"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one proven upper bound over a d grid.
    Bound(BoundArgs),
    /// Build the agreement table used by the main bound and write it as a cache file.
    PiTable(PiTableArgs),
    /// Monte Carlo estimate of the uniform-input rate.
    Simulate(SimulateArgs),
    /// Bounds and simulation side by side, with derived rows.
    Sweep(SweepArgs),
    /// Check every bound against exhaustive enumeration at small n.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Warmup,
    Main,
    Efficient,
    Corollary,
}

impl From<KindArg> for BoundKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Warmup => BoundKind::Warmup,
            KindArg::Main => BoundKind::Main,
            KindArg::Efficient => BoundKind::Efficient,
            KindArg::Corollary => BoundKind::Corollary,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Warmup,
    Main,
    Efficient,
    Corollary,
    Sim,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct GridArgs {
    /// Single deletion probability.
    #[arg(long)]
    pub d: Option<f64>,

    /// Deletion probabilities as start:stop:step, endpoints inclusive.
    #[arg(long = "d-grid", value_name = "START:STOP:STEP")]
    pub d_grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file, replaced atomically (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t)]
    pub format: Format,

    /// Add the additive breakdown of each bound as c_* columns.
    #[arg(long)]
    pub verbose_components: bool,
}

#[derive(Debug, Args)]
pub struct DeltaArgs {
    /// Number of δ grid points tried by the δ-shifted bounds.
    #[arg(long, default_value_t = 50)]
    pub delta_grid_size: usize,

    /// Largest δ tried by the δ-shifted bounds.
    #[arg(long, default_value_t = 1.0)]
    pub max_delta: f64,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 0.99)]
    pub confidence: f64,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,

    #[arg(long)]
    pub n: usize,

    #[command(flatten)]
    pub grid: GridArgs,

    /// Fixed δ for the corollary bound instead of a grid search.
    #[arg(long)]
    pub delta: Option<f64>,

    #[command(flatten)]
    pub delta_grid: DeltaArgs,

    /// Agreement table cache; read if present, written otherwise.
    #[arg(long)]
    pub pi_cache: Option<PathBuf>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PiTableArgs {
    #[arg(long)]
    pub n: usize,

    /// Cache file, replaced atomically (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,

    #[command(flatten)]
    pub grid: GridArgs,

    #[command(flatten)]
    pub sim: SimArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: usize,

    #[command(flatten)]
    pub grid: GridArgs,

    /// Comma-separated bounds to compute, plus `sim` for simulation.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "main,sim")]
    pub kinds: Vec<SweepKind>,

    #[command(flatten)]
    pub sim: SimArgs,

    #[command(flatten)]
    pub delta_grid: DeltaArgs,

    #[arg(long)]
    pub pi_cache: Option<PathBuf>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Largest blocklength to enumerate (at most 12).
    #[arg(long, default_value_t = 6)]
    pub max_n: usize,

    #[arg(
        long = "d-grid",
        value_name = "START:STOP:STEP",
        default_value = "0.1:0.9:0.1"
    )]
    pub d_grid: String,

    /// Output file, replaced atomically (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
