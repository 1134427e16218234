use crate::cost::LayerWeights;
use crate::error::{Error, Result};
use crate::par::map_range;
use crate::policy::{Fingerprint, PolicyTable};
use crate::types::{validate_problem, BarrierParams, CostSpec, MarketParams, TimeGrid};

use super::{within_tie, SolveOptions};

/// Optimal policy under the log-barrier cost, by brute-force search over
/// every integer action at each `(k, r)`.
///
/// Ties go to the larger action: scanning `u = 0, 1, ..., r`, a candidate
/// replaces the incumbent when its value is `<=` the incumbent's. Exact ties
/// in real arithmetic, such as reorderings of purchases that all sit inside
/// the bounds, are then settled by rounding; set
/// [`SolveOptions::tie_rtol`] to compare within a relative band instead.
pub fn solve_constrained(
    k_shares: usize,
    grid: TimeGrid,
    params: MarketParams,
    spec: CostSpec,
    opts: &SolveOptions,
) -> Result<PolicyTable> {
    let problem = validate_problem(k_shares, grid, params, spec)?;
    let CostSpec::Constrained(barrier) = problem.spec else {
        return Err(Error::invalid(
            "cost",
            "solve_constrained needs a constrained cost spec",
        ));
    };
    let (actions, values) =
        backward_induction(k_shares, grid, params.beta(), Some(&barrier), opts)?;
    Ok(PolicyTable::from_layers(
        grid.n_steps(),
        k_shares,
        actions,
        values,
        Some(Fingerprint { grid, params, spec }),
    ))
}

/// Policy under the purely fiscal cost `f = x u`.
///
/// The values come from running the recursion, and come out as `J[k][r] = r`:
/// any purchase raises the price paid for what is left, so nothing beats
/// holding off, and buying everything at once ties with it. The action table
/// records the deferral policy (`U[k][r] = 0` before the horizon, buy all at
/// `N`); any single purchase time is equally optimal.
pub fn solve_fiscal(
    k_shares: usize,
    grid: TimeGrid,
    params: MarketParams,
    opts: &SolveOptions,
) -> Result<PolicyTable> {
    validate_problem(k_shares, grid, params, CostSpec::Fiscal)?;
    let (_, values) = backward_induction(k_shares, grid, params.beta(), None, opts)?;
    let n = grid.n_steps();
    let mut actions = vec![0; values.len()];
    actions[n * (k_shares + 1)..]
        .iter_mut()
        .enumerate()
        .for_each(|(r, a)| *a = r);
    Ok(PolicyTable::from_layers(
        n,
        k_shares,
        actions,
        values,
        Some(Fingerprint {
            grid,
            params,
            spec: CostSpec::Fiscal,
        }),
    ))
}

/// Fills the action and value tables layer by layer from the horizon. Cells
/// within a layer only read the layer after it, so they are computed in
/// parallel when enabled.
fn backward_induction(
    k_shares: usize,
    grid: TimeGrid,
    beta: f64,
    barrier: Option<&BarrierParams>,
    opts: &SolveOptions,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let n = grid.n_steps();
    let width = k_shares + 1;
    let work = (k_shares as u128).pow(2) * n as u128;
    let cells = width as u128 * grid.n_points() as u128;
    opts.check(work, cells)?;

    let tie = opts.tie_rtol.unwrap_or(0.0);

    let mut actions = vec![0usize; width * (n + 1)];
    let mut values = vec![0f64; width * (n + 1)];

    // horizon: buy whatever is left
    for r in 0..width {
        actions[n * width + r] = r;
        values[n * width + r] = r as f64;
    }

    for k in (0..n).rev() {
        let weights = barrier.map(|b| (LayerWeights::new(k, n, b), b));
        let (head, tail) = values.split_at_mut((k + 1) * width);
        let next = &tail[..width];
        let layer = map_range(opts.execution, 1, width, |r| {
            best_action(r, beta, next, tie, |u| match weights {
                Some((w, b)) => u as f64 + w.penalty(u, r, b),
                None => u as f64,
            })
        });
        let value_row = &mut head[k * width..];
        let action_row = &mut actions[k * width..(k + 1) * width];
        for (r, (u, v)) in (1..width).zip(layer) {
            action_row[r] = u;
            value_row[r] = v;
        }
    }
    Ok((actions, values))
}

#[inline]
fn best_action(
    r: usize,
    beta: f64,
    next: &[f64],
    tie: f64,
    cost: impl Fn(usize) -> f64,
) -> (usize, f64) {
    let mut best_u = 0;
    let mut best_val = cost(0) + next[r];
    for u in 1..=r {
        let val = cost(u) + (1.0 + beta * u as f64) * next[r - u];
        if within_tie(val, best_val, tie) {
            best_u = u;
            best_val = val;
        }
    }
    (best_u, best_val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::BarrierParams;

    fn reference_problem(n: usize) -> (TimeGrid, MarketParams, CostSpec) {
        (
            TimeGrid::with_steps(n).unwrap(),
            MarketParams::new(5e-5, 1.0).unwrap(),
            CostSpec::Constrained(BarrierParams::REFERENCE),
        )
    }

    #[test]
    fn empty_budget() {
        let (g, p, s) = reference_problem(7);
        let t = solve_constrained(0, g, p, s, &SolveOptions::default()).unwrap();
        assert_eq!(t.rollout(0).unwrap().purchases(), &[0; 8]);
        for k in 0..=7 {
            assert_eq!(t.value(k, 0), 0.0);
            assert_eq!(t.action(k, 0), 0);
        }
    }

    #[test]
    fn reference_n10_schedule() {
        let (g, p, s) = reference_problem(10);
        let t = solve_constrained(1000, g, p, s, &SolveOptions::default()).unwrap();
        assert_eq!(
            t.rollout(1000).unwrap().purchases(),
            &[0, 600, 240, 96, 38, 15, 6, 1, 2, 1, 1]
        );
    }

    // Buying 1 then 2 near the end ties with 2 then 1; the exact comparison
    // keeps the former, a tie band the latter.
    #[test]
    fn reference_tail_is_a_tie() {
        use crate::solver::{expected_cost_closed_form, TIE_RTOL};
        let (g, p, s) = reference_problem(10);
        let banded = SolveOptions::default().with_tie_rtol(TIE_RTOL);
        let t = solve_constrained(1000, g, p, s, &banded).unwrap();
        let swapped = t.rollout(1000).unwrap();
        assert_eq!(
            swapped.purchases(),
            &[0, 600, 240, 96, 38, 15, 6, 2, 1, 1, 1]
        );
        let exact = solve_constrained(1000, g, p, s, &SolveOptions::default())
            .unwrap()
            .rollout(1000)
            .unwrap();
        let a = expected_cost_closed_form(&exact, &p, &s, &g).unwrap();
        let b = expected_cost_closed_form(&swapped, &p, &s, &g).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn table_invariants() {
        let (g, p, s) = reference_problem(6);
        let t = solve_constrained(60, g, p, s, &SolveOptions::default()).unwrap();
        for k in 0..=6 {
            for r in 0..=60 {
                assert!(t.action(k, r) <= r);
                assert!(t.value(k, r) >= r as f64);
            }
        }
        for r in 0..=60 {
            assert_eq!(t.action(6, r), r);
            assert_eq!(t.value(6, r), r as f64);
        }
    }

    // Small positions cannot stay inside [LB, UB] with whole shares, so the
    // cost-to-go is not monotone in the position under the barrier cost.
    #[test]
    fn small_positions_pay_granularity_penalty() {
        let (g, p, s) = reference_problem(10);
        let t = solve_constrained(2, g, p, s, &SolveOptions::default()).unwrap();
        assert!(t.value(0, 1) > t.value(0, 2));
    }

    #[test]
    fn sequential_matches_parallel() {
        let (g, p, s) = reference_problem(12);
        let a = solve_constrained(300, g, p, s, &SolveOptions::default()).unwrap();
        let b = solve_constrained(300, g, p, s, &SolveOptions::sequential()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fiscal_values_equal_position() {
        let g = TimeGrid::with_steps(10).unwrap();
        let p = MarketParams::new(5e-5, 1.0).unwrap();
        let t = solve_fiscal(1000, g, p, &SolveOptions::default()).unwrap();
        assert_eq!(t.value(0, 1000), 1000.0);
        assert!(t.is_fiscal());
        let mut expected = [0; 11];
        expected[10] = 1000;
        assert_eq!(t.rollout(1000).unwrap().purchases(), &expected[..]);
    }

    #[test]
    fn fiscal_smallest_instance() {
        let g = TimeGrid::with_steps(1).unwrap();
        let p = MarketParams::new(5e-5, 1.0).unwrap();
        let t = solve_fiscal(1, g, p, &SolveOptions::default()).unwrap();
        assert_eq!(t.value(0, 1), 1.0);
        assert_eq!(t.action(0, 1), 0);
        assert_eq!(t.action(1, 1), 1);
    }

    #[test]
    fn wrong_regime_and_limits() {
        let (g, p, _) = reference_problem(10);
        assert!(solve_constrained(10, g, p, CostSpec::Fiscal, &SolveOptions::default()).is_err());
        let tight = SolveOptions {
            work_budget: 1000,
            ..SolveOptions::default()
        };
        let (g, p, s) = reference_problem(10);
        assert!(matches!(
            solve_constrained(1000, g, p, s, &tight),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
