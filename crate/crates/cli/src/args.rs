use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ctp", version, about = "Routing and road importance under uncertain blockages")]
pub struct Cli {
    /// Worker threads for Monte Carlo and per-edge work (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expected travel time of a routing policy from source to sink.
    Route(RouteArgs),
    /// Canadian betweenness of every road for one source-sink pair.
    Centrality(CentralityArgs),
    /// Normal prior on covariate coefficients from expert probabilities.
    Elicit(ElicitArgs),
    /// Per-replicate travel times of a policy.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Mc,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    #[value(name = "others_stochastic", alias = "others-stochastic")]
    OthersStochastic,
    #[value(name = "others_open", alias = "others-open")]
    OthersOpen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Handling {
    Penalty,
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Geodesic,
}

/// Graph, endpoints and blockage probabilities.
#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// Graph JSON document.
    #[arg(long)]
    pub graph: PathBuf,

    #[arg(long)]
    pub source: String,

    #[arg(long)]
    pub sink: String,

    /// `edge_id,p` CSV overriding the graph's inline probabilities.
    #[arg(long, conflicts_with_all = ["covariates", "beta"])]
    pub probabilities: Option<PathBuf>,

    /// `edge_id,<covariates...>` CSV; probabilities follow the logistic link.
    #[arg(long, requires = "beta")]
    pub covariates: Option<PathBuf>,

    /// Comma-separated coefficients, one per covariate column.
    #[arg(long, requires = "covariates", value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Option<Vec<f64>>,

    /// Cost charged when the sink turns out unreachable
    /// (default: twice the total edge cost).
    #[arg(long)]
    pub failure_cost: Option<f64>,

    /// Largest number of uncertain roads the exact solver accepts.
    #[arg(long, default_value_t = ctp_core::traveler::DEFAULT_UNCERTAIN_CAP)]
    pub cap: usize,
}

/// Outputs and randomness shared by the subcommands.
#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    pub method: Method,

    /// Monte Carlo replications.
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output file (default: standard output).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RouteArgs {
    #[command(flatten)]
    pub network: NetworkArgs,

    #[command(flatten)]
    pub run: RunArgs,

    /// `optimal`, `replan`, or `route:<node>,<node>,...`.
    #[arg(long, default_value = "optimal")]
    pub policy: String,
}

#[derive(Debug, Args)]
pub struct CentralityArgs {
    #[command(flatten)]
    pub network: NetworkArgs,

    #[command(flatten)]
    pub run: RunArgs,

    #[arg(long, value_enum, default_value_t = Mode::OthersStochastic)]
    pub mode: Mode,

    #[arg(long, value_enum, default_value_t = Handling::Penalty)]
    pub failure_handling: Handling,

    /// Add a geodesic edge-betweenness column.
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,

    /// Score only these edges (default: all).
    #[arg(long = "edge")]
    pub edges: Vec<String>,

    /// Configuration and run summary JSON
    /// (default: `<output>.summary.json` when --output is given).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub network: NetworkArgs,

    /// Monte Carlo replications.
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Per-replicate CSV (default: standard output).
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// `optimal`, `replan`, or `route:<node>,<node>,...`.
    #[arg(long, default_value = "optimal")]
    pub policy: String,

    /// Configuration and run summary JSON
    /// (default: `<output>.summary.json` when --output is given).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ElicitArgs {
    /// `edge_id,<covariates...>` CSV.
    #[arg(long)]
    pub covariates: PathBuf,

    /// Expert point estimates, `edge_id,p`.
    #[arg(long, required_unless_present = "draws", conflicts_with = "draws")]
    pub experts: Option<PathBuf>,

    /// Expert distributional draws, `draw_id,edge_id,p`.
    #[arg(long)]
    pub draws: Option<PathBuf>,

    /// Coefficient draws per expert draw when mixing.
    #[arg(long, default_value_t = 1_000)]
    pub per_draw: usize,

    /// Coefficient draws from the fitted prior for point estimates.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,

    /// Clamp bound for expert probabilities of 0 or 1.
    #[arg(long, default_value_t = ctp_core::elicit::DEFAULT_CLAMP)]
    pub clamp: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Prior JSON (default: standard output).
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Also write per-road probability summaries, `edge_id,mean,q05,q50,q95`.
    #[arg(long)]
    pub pushforward: Option<PathBuf>,

    /// Also write the coefficient draws as CSV.
    #[arg(long)]
    pub betas: Option<PathBuf>,
}
