//! Baseline schedules.

use crate::error::{Error, Result};
use crate::types::AllocationVector;

/// Uniform schedule: `K / N` shares at the start of each of the `N`
/// intervals, nothing at the horizon point. The remainder `K mod N` goes one
/// share each to the earliest intervals.
pub fn bertsimas_allocation(k_shares: usize, n_steps: usize) -> AllocationVector {
    assert!(n_steps >= 1, "at least one interval");
    let base = k_shares / n_steps;
    let extra = k_shares % n_steps;
    let mut purchases: Vec<usize> = (0..n_steps)
        .map(|k| base + usize::from(k < extra))
        .collect();
    purchases.push(0);
    AllocationVector::new(purchases)
}

/// Entire block at decision point `j`.
pub fn one_time_allocation(k_shares: usize, n_steps: usize, j: usize) -> Result<AllocationVector> {
    if j > n_steps {
        return Err(Error::IndexOutOfRange {
            index: j,
            max: n_steps,
        });
    }
    let mut purchases = vec![0; n_steps + 1];
    purchases[j] = k_shares;
    Ok(AllocationVector::new(purchases))
}

/// Midpoint decision index used for the one-time baseline, `floor(N / 2)`.
pub fn midpoint(n_steps: usize) -> usize {
    n_steps / 2
}
