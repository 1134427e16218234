//! Backtests on recorded prices, Monte-Carlo evaluation under the model, and
//! comparison reports.

mod backtest;
mod montecarlo;
mod prices;

pub use backtest::{
    compare, execute_on_path, execute_on_path_with_impact, BacktestReport, CostRatio,
    EvaluationMode, NamedAllocation, ReportMetadata, ReportRow, REPORT_CSV_HEADER,
};
pub use montecarlo::{mc_expected_cost, mc_expected_cost_with, McEstimate, PATHS_PER_BATCH};
pub use prices::{load_prices, load_prices_file};
