use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Exact and Monte-Carlo computations for non-backtracking random walks.
#[derive(Parser, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(name = "nbw", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format (default: csv for tables, json otherwise).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Omit the timestamp so identical runs give identical bytes.
    #[arg(long, global = true)]
    #[serde(default)]
    pub no_timestamp: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Exact walk counts b_n(x) (and b_n^iota(x) with --directed).
    Counts(CountsArgs),
    /// Dominant eigenvalues at wave vectors or over a torus dual grid.
    Spectrum(SpectrumArgs),
    /// Generating function B_z(k) in closed form and as a series.
    Greens(GreensArgs),
    /// Endpoint and two-time characteristic functions against their Gaussian limits.
    Clt(CltArgs),
    /// Exact uniform mixing time on a torus or hypercube against the lemma bounds.
    Mixing(MixingArgs),
    /// Monte-Carlo path ensemble statistics.
    Sample(SampleArgs),
    /// Cross-validation of spectral, generating-function and enumeration routes.
    Audit(AuditArgs),
    /// Re-run a configuration echoed by an earlier run.
    Replay(ReplayArgs),
}

impl Command {
    pub fn default_format(&self) -> Format {
        match self {
            Command::Counts(_) | Command::Spectrum(_) => Format::Csv,
            _ => Format::Json,
        }
    }
}

/// Selects the step set.
#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSetArgs {
    /// Lattice dimension (the degree m for the hypercube).
    #[arg(long, default_value_t = 2)]
    pub dim: usize,

    /// `nn`, `hamming(r)` or `hypercube`.
    #[arg(long, default_value = "nn")]
    pub preset: String,

    /// JSON step set `{"dim": d, "points": [[...], ...], "modulus": r}`;
    /// overrides --preset.
    #[arg(long)]
    pub step_set: Option<PathBuf>,

    /// Work on the torus of this width.
    #[arg(long)]
    pub modulus: Option<u32>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub step_set: StepSetArgs,

    /// Walk length.
    #[arg(long)]
    pub n: u64,

    /// Also emit b_n^iota(x), the walks whose first step is not iota.
    #[arg(long)]
    #[serde(default)]
    pub directed: bool,

    /// Refuse runs with more DP states than this.
    #[arg(long, default_value_t = nbw_core::exact_count::DEFAULT_STATE_CAP)]
    pub cap: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub step_set: StepSetArgs,

    /// Wave vector, comma separated; components may use `pi`, e.g. `pi/2,-pi`.
    #[arg(long = "k", allow_hyphen_values = true)]
    #[serde(default)]
    pub k: Vec<String>,

    /// Evaluate over the dual grid of the torus (needs a modulus).
    #[arg(long)]
    #[serde(default)]
    pub dual_grid: bool,

    /// Also locate the first degenerate point along this direction.
    #[arg(long, allow_hyphen_values = true)]
    pub find_degenerate: Option<String>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreensArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub step_set: StepSetArgs,

    /// `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,

    #[arg(long = "k", allow_hyphen_values = true)]
    #[serde(default)]
    pub k: Vec<String>,

    /// Series coefficients b_0..b_N to emit alongside.
    #[arg(long, default_value_t = 0)]
    pub terms: usize,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub step_set: StepSetArgs,

    #[arg(long)]
    pub n: u64,

    /// Unscaled wave vectors; with --times, one per time segment.
    #[arg(long = "k", allow_hyphen_values = true)]
    #[serde(default)]
    pub k: Vec<String>,

    /// Increasing times in (0, 1], comma separated.
    #[arg(long)]
    pub times: Option<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Hamming,
    Nn,
    Hypercube,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,

    /// Torus width.
    #[arg(long)]
    pub r: Option<u32>,

    /// Torus dimension.
    #[arg(long)]
    pub d: Option<usize>,

    /// Hypercube dimension.
    #[arg(long)]
    pub m: Option<usize>,

    #[arg(long)]
    pub xi: f64,

    /// Last n scanned (default: 50 times the finite lemma bound).
    #[arg(long)]
    pub horizon: Option<u64>,

    /// Write the deviation curve CSV here.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub step_set: StepSetArgs,

    #[arg(long)]
    pub n: u64,

    #[arg(long, default_value_t = 10_000)]
    pub count: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Write every path, one line of direction indices per path.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditArgs {
    /// Smaller grids.
    #[arg(long)]
    #[serde(default)]
    pub quick: bool,

    /// Test fixture: multiply lambda_+ by (1 + EPS) in the spectral formula.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub perturb_lambda: f64,

    /// Seed for the random wave vectors.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A JSON output of an earlier run, or just its `config` object.
    #[arg(long)]
    pub config: PathBuf,
}
