use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "colorbin", version, about = "Colorful bin packing games: equilibria, dynamics and exact ratios")]
pub struct Cli {
    #[command(flatten)]
    pub caps: CapArgs,

    #[command(subcommand)]
    pub command: Command,
}

/// Limits for the exponential oracles, overridable from the environment.
#[derive(Debug, Clone, Copy, Args)]
pub struct CapArgs {
    /// Largest game handed to the exact optimum solver.
    #[arg(long, global = true, env = "COLORBIN_OPT_CAP", default_value_t = colorbin_core::oracle::OPT_CAP)]
    pub opt_cap: usize,

    /// Largest game whose equilibria are enumerated.
    #[arg(long, global = true, env = "COLORBIN_NE_CAP", default_value_t = colorbin_core::oracle::NE_CAP)]
    pub ne_cap: usize,

    /// Profiles explored by a cycle search before giving up.
    #[arg(long, global = true, env = "COLORBIN_STATE_CAP", default_value_t = colorbin_core::dynamics::DEFAULT_STATE_CAP)]
    pub state_cap: usize,

    /// Moves allowed in one dynamics run.
    #[arg(long, global = true, env = "COLORBIN_MAX_STEPS", default_value_t = 1_000_000)]
    pub max_steps: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute an equilibrium with one of the constructive algorithms.
    Solve(SolveArgs),
    /// Run improving-move dynamics, or search for a cycle.
    Dynamics(DynamicsArgs),
    /// Exact optimum, and optionally every equilibrium.
    Oracle(OracleArgs),
    /// Write a generated case (or a random instance) as JSON.
    Generate(GenerateArgs),
    /// Exact price of stability / anarchy as CSV.
    Ratios(RatiosArgs),
    /// Re-check every claim a generated case makes.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// Best single bin at a time (any sizes).
    Alg1,
    /// Alternating fill (uniform sizes).
    Alg2,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance JSON.
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "alg1")]
    pub alg: Algorithm,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    First,
    Random,
    MaxGain,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    /// Instance JSON, or a generated case JSON.
    pub instance: PathBuf,
    /// Starting profile JSON; all singletons when omitted.
    #[arg(long)]
    pub start: Option<PathBuf>,
    /// Start from a seeded random feasible profile instead.
    #[arg(long, conflicts_with = "start")]
    pub random_start: bool,
    #[arg(long, value_enum, default_value = "first")]
    pub policy: PolicyArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Allow moves into bins that are already infeasible, and search for a
    /// cycle of improving moves.
    #[arg(long)]
    pub allow_nonvalid: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub instance: PathBuf,
    /// Also enumerate every equilibrium and report exact ratios.
    #[arg(long)]
    pub nash: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyParams {
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long)]
    pub h: Option<u64>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Odd-capacity variant (poa-uniform-multicolor).
    #[arg(long)]
    pub odd: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Egalitarian,
    Proportional,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Family name, or `random`.
    pub family: String,
    #[command(flatten)]
    pub params: FamilyParams,
    /// Size distribution for `random`: uniform:K, grid:D or zero-heavy:D.
    #[arg(long, default_value = "grid:10")]
    pub sizes: String,
    #[arg(long, value_enum, default_value = "egalitarian")]
    pub model: ModelArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RatiosArgs {
    /// Instance or case JSON files, one row each.
    pub instances: Vec<PathBuf>,
    /// Sweep a generated family over the values given by --ks.
    #[arg(long)]
    pub family: Option<String>,
    /// Comma-separated values of the family's size parameter (k, or n).
    #[arg(long, value_delimiter = ',')]
    pub ks: Vec<u64>,
    #[arg(long)]
    pub h: Option<u64>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub odd: bool,
    /// Number of random instances to sweep.
    #[arg(long)]
    pub random: Option<usize>,
    /// Items per random instance.
    #[arg(long, default_value_t = 6)]
    pub items: usize,
    /// Colours per random instance.
    #[arg(long, default_value_t = 2)]
    pub colors: u32,
    #[arg(long, default_value = "grid:10")]
    pub sizes: String,
    #[arg(long, value_enum, default_value = "egalitarian")]
    pub model: ModelArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Experiment plan JSON; replaces the source options above.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Generated case JSON.
    pub case: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
