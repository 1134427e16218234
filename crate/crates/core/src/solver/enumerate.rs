use crate::cost::instantaneous_cost;
use crate::error::{Error, Result};
use crate::types::{AllocationVector, CostSpec, MarketParams, TimeGrid};

use super::{ENUMERATION_LIMIT, ENUMERATION_TIE_RTOL};

/// Expected total cost of a fixed schedule.
///
/// With zero-mean independent noise `E[x_k] = x0 prod_{j<k} (1 + beta u_j)`,
/// and since `f` is linear in `x` the expected cost is `f` evaluated at the
/// expected price path.
pub fn expected_cost_closed_form(
    alloc: &AllocationVector,
    params: &MarketParams,
    spec: &CostSpec,
    grid: &TimeGrid,
) -> Result<f64> {
    alloc.check(alloc.total(), grid)?;
    let n = grid.n_steps();
    let mut price = params.x0();
    let mut total = 0.0;
    for (k, (&u, r)) in alloc.purchases().iter().zip(alloc.positions()).enumerate() {
        total += instantaneous_cost(price, u, r, k, n, spec)?;
        price *= 1.0 + params.beta() * u as f64;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationResult {
    pub allocation: AllocationVector,
    pub expected_cost: f64,
    /// Number of schedules evaluated, `C(K + N, N)`.
    pub visited: u128,
}

/// Number of nonnegative integer vectors of length `parts` summing to `total`.
fn compositions(total: usize, parts: usize) -> u128 {
    // C(total + parts - 1, parts - 1), saturating at u128::MAX
    let (n, k) = ((total + parts - 1) as u128, (parts - 1) as u128);
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        match c.checked_mul(n - i) {
            Some(v) => c = v / (i + 1),
            None => return u128::MAX,
        }
    }
    c
}

/// Minimises the expected cost over every feasible schedule.
///
/// Schedules are visited in decreasing lexicographic order; a later schedule
/// replaces the incumbent only if it is cheaper by more than
/// [`ENUMERATION_TIE_RTOL`], so among (near-)ties the lexicographically
/// largest wins.
pub fn enumerate_all_allocations(
    k_shares: usize,
    grid: TimeGrid,
    params: MarketParams,
    spec: CostSpec,
) -> Result<EnumerationResult> {
    let parts = grid.n_points();
    let count = compositions(k_shares, parts);
    if count > ENUMERATION_LIMIT {
        return Err(Error::ResourceLimit {
            what: "schedules to enumerate",
            requested: count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut current = vec![0usize; parts];
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut visited = 0u128;
    visit(&mut current, 0, k_shares, &mut |schedule| {
        visited += 1;
        let alloc = AllocationVector::new(schedule.to_vec());
        let cost = expected_cost_closed_form(&alloc, &params, &spec, &grid)?;
        let better = match &best {
            None => true,
            Some((_, b)) if b.is_infinite() => cost < *b,
            Some((_, b)) => cost < b - ENUMERATION_TIE_RTOL * b.abs(),
        };
        if better {
            best = Some((schedule.to_vec(), cost));
        }
        Ok(())
    })?;
    let (allocation, expected_cost) = best.expect("at least one schedule");
    Ok(EnumerationResult {
        allocation: allocation.into(),
        expected_cost,
        visited,
    })
}

fn visit(
    current: &mut [usize],
    pos: usize,
    remaining: usize,
    f: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if pos == current.len() - 1 {
        current[pos] = remaining;
        return f(current);
    }
    for u in (0..=remaining).rev() {
        current[pos] = u;
        visit(current, pos + 1, remaining - u, f)?;
    }
    current[pos] = 0;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let p = MarketParams::new(5e-5, 100.0).unwrap();
        let g = TimeGrid::with_steps(10).unwrap();
        let mut first = vec![0; 11];
        first[0] = 1000;
        let mut last = vec![0; 11];
        last[10] = 1000;
        let fiscal = CostSpec::Fiscal;
        assert_eq!(
            expected_cost_closed_form(&first.into(), &p, &fiscal, &g).unwrap(),
            100_000.0
        );
        assert_eq!(
            expected_cost_closed_form(&last.into(), &p, &fiscal, &g).unwrap(),
            100_000.0
        );

        let p = MarketParams::new(1e-4, 100.0).unwrap();
        let g = TimeGrid::with_steps(2).unwrap();
        let c = expected_cost_closed_form(&vec![500, 500, 0].into(), &p, &fiscal, &g).unwrap();
        assert!((c - 102_500.0).abs() < 1e-9);
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(3, 3), 10);
        assert_eq!(compositions(0, 5), 1);
        assert_eq!(compositions(1000, 11), 291_098_519_807_782_284_023_426);
    }

    #[test]
    fn fiscal_single_share_tie_prefers_earliest() {
        let r = enumerate_all_allocations(
            1,
            TimeGrid::with_steps(1).unwrap(),
            MarketParams::new(5e-5, 1.0).unwrap(),
            CostSpec::Fiscal,
        )
        .unwrap();
        assert_eq!(r.allocation.purchases(), &[1, 0]);
        assert_eq!(r.expected_cost, 1.0);
        assert_eq!(r.visited, 2);
    }

    // [3, 0, 0] is visited first and breaks the upper bound at t_0
    #[test]
    fn infinite_first_schedule_is_replaced() {
        let spec = CostSpec::constrained(10.0, 1.0, 2.0, 0.2, 0.6).unwrap();
        let r = enumerate_all_allocations(
            3,
            TimeGrid::with_steps(2).unwrap(),
            MarketParams::new(5e-5, 1.0).unwrap(),
            spec,
        )
        .unwrap();
        assert_eq!(r.allocation.purchases(), &[0, 1, 2]);
        assert!(r.expected_cost.is_finite());
    }

    #[test]
    fn too_many_schedules() {
        let r = enumerate_all_allocations(
            1000,
            TimeGrid::with_steps(10).unwrap(),
            MarketParams::new(5e-5, 1.0).unwrap(),
            CostSpec::Fiscal,
        );
        assert!(matches!(r, Err(Error::ResourceLimit { .. })));
    }
}
