use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "modflow", version, about = "Modular-flow experiment runner")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random choice (instances, QPE shots).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for `<command>.csv` and `<command>.json`; CSV goes to stdout otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Largest polynomial degree applied to a matrix before failing with exit code 3.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub degree_cap: u64,
    /// Fill the `duration_s` column (reports are then no longer byte-reproducible).
    #[arg(long, global = true)]
    pub record_timing: bool,
    /// JSON object with `command` and flag values; expanded before parsing.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Error of the truncated log series on a grid of [1/kappa, 1].
    ApproxLog(ApproxLogArgs),
    /// Audit of the bounded modular-Hamiltonian polynomial.
    MhPoly(MhPolyArgs),
    /// Approximate modular flow of an operator against the exact flow.
    Flow(FlowArgs),
    /// Modular flow applied to one factor of a bipartite pure state.
    PurifiedFlow(PurifiedFlowArgs),
    /// Von Neumann entropy by sampled phase estimation or the deterministic functional.
    Entropy(EntropyArgs),
    /// Two-sided correlator over an (s, t) grid.
    Correlator(CorrelatorArgs),
    /// Entanglement entropy of BC under the modular flow of AB, and its slope.
    Ccc(CccArgs),
    /// Query-count scaling against kappa.
    SweepKappa(SweepKappaArgs),
    /// Query-count scaling against modular time.
    SweepTime(SweepTimeArgs),
    /// Query ledger for parameter points, without building matrices.
    QueryCount(QueryCountArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ApproxLog(_) => "approx-log",
            Command::MhPoly(_) => "mh-poly",
            Command::Flow(_) => "flow",
            Command::PurifiedFlow(_) => "purified-flow",
            Command::Entropy(_) => "entropy",
            Command::Correlator(_) => "correlator",
            Command::Ccc(_) => "ccc",
            Command::SweepKappa(_) => "sweep-kappa",
            Command::SweepTime(_) => "sweep-time",
            Command::QueryCount(_) => "query-count",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleArg {
    /// Closed-form geometric rule.
    ClosedForm,
    /// Rule backed by the 1/((N+1)x) error bound.
    Certified,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Exact,
    Polynomial,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Qpe,
    Functional,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ApproxLogArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long)]
    pub epsilon: f64,
    /// Number of evenly spaced points in [1/kappa, 1].
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = RuleArg::Certified)]
    pub degree_rule: RuleArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MhPolyArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long)]
    pub epsilon: f64,
    /// Number of evenly spaced points in [1/kappa, 1] for the contract check.
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FlowArgs {
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub operator: Option<PathBuf>,
    /// Modular times (comma separated); ignored with --random.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub time: Vec<f64>,
    /// Target accuracies; random instances cycle through them.
    #[arg(long, value_delimiter = ',', default_value = "0.01")]
    pub epsilon: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Polynomial)]
    pub mode: ModeArg,
    /// Use this kappa instead of the state's spectral floor.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Number of random instances to generate instead of reading files.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub max_dim: usize,
    #[arg(long, default_value_t = 8.0)]
    pub max_kappa: f64,
    #[arg(long, default_value_t = 5.0)]
    pub max_time: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PurifiedFlowArgs {
    /// Bipartite pure state, or a density matrix to purify.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub time: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub delta: Vec<f64>,
    #[arg(long)]
    pub random: Option<usize>,
    /// Local dimensions for random instances (cycled).
    #[arg(long, value_delimiter = ',', default_value = "2,4")]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub max_time: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EntropyArgs {
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Functional)]
    pub method: MethodArg,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub epsilon: Vec<f64>,
    /// Allowed failure probability of the sampled estimate.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Independent sampled estimates per state and epsilon.
    #[arg(long, default_value_t = 1)]
    pub repetitions: usize,
    /// Round sampled phases to this many bits.
    #[arg(long)]
    pub rounding_bits: Option<u32>,
    /// Random states per dimension.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub dim: Vec<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CorrelatorArgs {
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub psi_r: Option<PathBuf>,
    #[arg(long)]
    pub psi_l: Option<PathBuf>,
    /// Hamiltonian generating the time dependence of psi_l.
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub s: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub t: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    #[arg(long, default_value_t = 16.0)]
    pub max_kappa: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CccArgs {
    /// Tripartite density matrix whose file dims have three factors.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1")]
    pub times: Vec<f64>,
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2,2,2")]
    pub dims: Vec<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepKappaArgs {
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
    pub kappas: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    pub time: f64,
    #[arg(long, default_value_t = 2.0)]
    pub expected_slope: f64,
    #[arg(long, default_value_t = 0.3)]
    pub slope_tolerance: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepTimeArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
    pub times: Vec<f64>,
    #[arg(long, default_value_t = 8.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    pub expected_slope: f64,
    #[arg(long, default_value_t = 0.2)]
    pub slope_tolerance: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct QueryCountArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub kappa: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub epsilon: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub time: Vec<f64>,
}
