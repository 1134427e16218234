use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use optexec::solver::DEFAULT_WORK_BUDGET;

/// Cost-optimal schedules for buying a block of shares under geometric
/// price impact.
#[derive(Debug, Parser)]
#[command(name = "optexec", version)]
pub struct Cli {
    /// Flat `key=value` file of default flag values (keys are long flag names
    /// without dashes). Flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the optimal policy and print the schedule from K shares.
    Solve(SolveArgs),
    /// Print the schedule encoded in a saved policy table.
    Rollout(RolloutArgs),
    /// Monte-Carlo expected cost of one strategy under the price model.
    Simulate(SimulateArgs),
    /// Cost strategies against a recorded daily price series.
    Backtest(BacktestArgs),
    /// Compare strategies by Monte-Carlo expected cost under the price model.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostKind {
    /// f = x u (currency)
    Fiscal,
    /// f = x u plus log-barrier penalties on the fraction bought
    Constrained,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    /// Per-step cost model.
    #[arg(long, value_enum, default_value_t = CostKind::Constrained)]
    pub cost: CostKind,
    /// Lower-barrier weight C_l (dimensionless; the penalty scales with price x).
    #[arg(long, default_value_t = 1000.0)]
    pub cl: f64,
    /// Upper-barrier weight C_u (dimensionless; the penalty scales with price x).
    #[arg(long, default_value_t = 10.0)]
    pub cu: f64,
    /// Exponent gamma on the time weights (k/N)^gamma and (N/k)^gamma (dimensionless).
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    /// Lower bound LB on the fraction u/R bought per step (fraction of position).
    #[arg(long, default_value_t = 0.2)]
    pub lb: f64,
    /// Upper bound UB on the fraction u/R bought per step (fraction of position).
    #[arg(long, default_value_t = 0.6)]
    pub ub: f64,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Shares to buy, K (whole shares).
    #[arg(long, default_value_t = 1000)]
    pub k: usize,
    /// Trading intervals N; decisions are made at N + 1 points t_0..t_N.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Price impact beta (fractional price rise per share bought).
    #[arg(long, default_value_t = 5e-5)]
    pub beta: f64,
    /// Initial price x_0 (currency per share).
    #[arg(long, default_value_t = 1.0)]
    pub x0: f64,
    /// Horizon T (time units); defaults to N, one unit per interval.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[command(flatten)]
    pub cost: CostArgs,
}

#[derive(Debug, Args)]
pub struct ExecArgs {
    /// Cap on K*K*N inner-loop evaluations (count) before a solve is refused.
    #[arg(long, default_value_t = DEFAULT_WORK_BUDGET)]
    pub work_budget: u128,
    /// Run on the calling thread only.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Per-step return noise: `A` for +A/-A with probability 1/2 each, or a
    /// list `e1:p1,e2:p2,...` (fractional returns and probabilities, zero mean).
    #[arg(long, default_value = "0.01", allow_hyphen_values = true)]
    pub noise: String,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub exec: ExecArgs,
    /// Write the policy table (k,r,u_opt,j_value at unit price) to this CSV.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RolloutArgs {
    /// Policy table CSV written by `solve --out`.
    #[arg(long, value_name = "FILE")]
    pub policy: PathBuf,
    /// Starting position (shares); defaults to the table's K.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub exec: ExecArgs,
    /// Strategy to simulate: dp, bertsimas, onetime@mid or onetime@<j>.
    #[arg(long, default_value = "dp")]
    pub strategy: String,
    /// Number of simulated price paths (count).
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    /// Random seed (required, so every run can be repeated).
    #[arg(long)]
    pub seed: u64,
    /// Also write one simulated price path (k,price in currency per share) to this CSV.
    #[arg(long, value_name = "FILE")]
    pub path_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Comma-separated strategies: dp, bertsimas, onetime@mid, onetime@<j>.
    #[arg(long, default_value = "bertsimas,onetime@mid,dp")]
    pub strategies: String,
    /// Strategy whose cost is the ratio denominator; defaults to bertsimas
    /// when listed, else the first strategy.
    #[arg(long)]
    pub baseline: Option<String>,
    /// Also write the report (strategy,total_cost,ratio_vs_baseline) to this CSV.
    #[arg(long, value_name = "FILE")]
    pub csv_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct BacktestArgs {
    /// Daily price CSV with header `date,open` (ISO dates, currency per share).
    #[arg(long, value_name = "FILE")]
    pub prices: PathBuf,
    /// Shares to buy, K (whole shares).
    #[arg(long, default_value_t = 1000)]
    pub k: usize,
    /// Trading intervals N; uses the first N + 1 prices. Defaults to one
    /// fewer than the number of rows.
    #[arg(long)]
    pub n: Option<usize>,
    /// Price impact beta used by the dp strategy and by --impact-adjusted
    /// (fractional price rise per share bought).
    #[arg(long, default_value_t = 5e-5)]
    pub beta: f64,
    #[command(flatten)]
    pub cost: CostArgs,
    #[command(flatten)]
    pub report: ReportArgs,
    #[command(flatten)]
    pub exec: ExecArgs,
    /// Scale each recorded price by the drift of our own earlier purchases,
    /// prod (1 + beta u_j). Off by default: costs use the recorded prices.
    #[arg(long)]
    pub impact_adjusted: bool,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CompareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub report: ReportArgs,
    #[command(flatten)]
    pub exec: ExecArgs,
    /// Simulated price paths per strategy (count).
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    /// Random seed (required, so every run can be repeated).
    #[arg(long)]
    pub seed: u64,
}
