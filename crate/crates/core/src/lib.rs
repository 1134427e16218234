//! Cost-optimal schedules for buying a block of `K` shares over `N + 1`
//! decision points when each purchase pushes the price up geometrically,
//! `x_{k+1} = x_k (1 + beta u_k + eps_k)`.
//!
//! The main entry point is [`solve_constrained`], a backward induction at
//! unit price over integer positions. Because the cost-to-go is linear in the
//! current price, the optimal action depends only on the time index and the
//! remaining position, and a schedule is obtained with
//! [`PolicyTable::rollout`] without ever looking at prices.
//!
//! ```
//! use optexec::{solve_constrained, BarrierParams, CostSpec, MarketParams, SolveOptions, TimeGrid};
//!
//! let table = solve_constrained(
//!     1000,
//!     TimeGrid::with_steps(10)?,
//!     MarketParams::new(5e-5, 1.0)?,
//!     CostSpec::Constrained(BarrierParams::REFERENCE),
//!     &SolveOptions::default(),
//! )?;
//! let schedule = table.rollout(1000)?;
//! assert_eq!(schedule.purchases(), &[0, 600, 240, 96, 38, 15, 6, 1, 2, 1, 1]);
//! # Ok::<(), optexec::Error>(())
//! ```
//!
//! The `parallel` feature (on by default) spreads each time layer of the
//! solvers and the Monte-Carlo batches over a rayon pool. Results are
//! identical with and without it.

pub mod cost;
pub mod error;
pub mod evaluation;
pub mod fmt;
pub mod par;
pub mod policy;
pub mod price_model;
pub mod rng;
pub mod solver;
pub mod strategies;
pub mod types;

pub use cost::{constrained_cost, fiscal_cost, instantaneous_cost};
pub use error::{Error, Result, Violation};
pub use evaluation::{
    compare, execute_on_path, load_prices, mc_expected_cost, BacktestReport, EvaluationMode,
    McEstimate, NamedAllocation,
};
pub use par::Execution;
pub use policy::PolicyTable;
pub use price_model::{simulate_path, step_arithmetic, step_geometric, AbmParams, Impact};
pub use solver::{
    enumerate_all_allocations, expected_cost_closed_form, solve_constrained, solve_fiscal,
    solve_tabular, SolveOptions, TabularSolution,
};
pub use strategies::{bertsimas_allocation, one_time_allocation};
pub use types::{
    validate_problem, AllocationVector, BarrierParams, CostSpec, MarketParams, NoiseModel,
    PricePath, Problem, TimeGrid,
};
