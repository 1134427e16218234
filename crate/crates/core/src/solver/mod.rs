//! Backward-induction solvers.
//!
//! * [`solve_constrained`] / [`solve_fiscal`]: the unit-price recursion
//!   `J[k][r] = min_u f(1, u, r) + (1 + beta u) J[k+1][r - u]`, valid because
//!   the cost-to-go is linear in price and the optimal action does not depend
//!   on it.
//! * [`solve_tabular`]: the full `(k, price, position)` recursion over a finite
//!   price grid. Only usable at desk scale; kept as an oracle for the two
//!   price-independence results.
//! * [`enumerate_all_allocations`]: brute force over every schedule.

mod enumerate;
mod tabular;
mod unit;

pub use enumerate::{enumerate_all_allocations, expected_cost_closed_form, EnumerationResult};
pub use tabular::{solve_tabular, solve_tabular_with_impact, TabularSolution};
pub use unit::{solve_constrained, solve_fiscal};

use crate::error::{Error, Result};
use crate::par::Execution;

/// Default cap on `K * K * N`, the number of inner-loop evaluations.
pub const DEFAULT_WORK_BUDGET: u128 = 100_000_000_000;
/// Default cap on the number of stored table cells.
pub const DEFAULT_CELL_LIMIT: u128 = 100_000_000;
/// Cap on the number of schedules [`enumerate_all_allocations`] will visit.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Relative band within which the tabular solver treats two action values as
/// tied (and keeps the larger action), unless [`SolveOptions::tie_rtol`] says
/// otherwise. The unit-price solver compares exactly by default.
pub const TIE_RTOL: f64 = 1e-12;
/// Relative band within which enumeration treats two schedules as tied (and
/// keeps the lexicographically larger one).
pub const ENUMERATION_TIE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub execution: Execution,
    pub work_budget: u128,
    pub cell_limit: u128,
    /// Relative tie band for action comparisons; `None` keeps each solver's
    /// default (exact `<=` for the unit-price recursion, [`TIE_RTOL`] for the
    /// tabular one). Within the band the larger action wins.
    pub tie_rtol: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            execution: Execution::default(),
            work_budget: DEFAULT_WORK_BUDGET,
            cell_limit: DEFAULT_CELL_LIMIT,
            tie_rtol: None,
        }
    }
}

impl SolveOptions {
    pub fn sequential() -> Self {
        Self {
            execution: Execution::Sequential,
            ..Self::default()
        }
    }

    /// Same options with an explicit tie band.
    pub fn with_tie_rtol(self, rtol: f64) -> Self {
        Self {
            tie_rtol: Some(rtol),
            ..self
        }
    }

    fn check(&self, work: u128, cells: u128) -> Result<()> {
        if let Some(t) = self.tie_rtol {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::invalid(
                    "tie_rtol",
                    format!("tie band must be nonnegative, got {t}"),
                ));
            }
        }
        if work > self.work_budget {
            return Err(Error::ResourceLimit {
                what: "work (K*K*N evaluations)",
                requested: work,
                limit: self.work_budget,
            });
        }
        if cells > self.cell_limit {
            return Err(Error::ResourceLimit {
                what: "table cells",
                requested: cells,
                limit: self.cell_limit,
            });
        }
        Ok(())
    }
}

/// `val <= best`, widened by a relative band.
fn within_tie(val: f64, best: f64, rtol: f64) -> bool {
    if best.is_finite() {
        val <= best + rtol * best.abs()
    } else {
        val <= best
    }
}
