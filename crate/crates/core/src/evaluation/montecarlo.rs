use crate::cost::instantaneous_cost;
use crate::error::{Error, Result};
use crate::par::{map_range, Execution};
use crate::price_model::step_geometric;
use crate::rng::DrawStream;
use crate::types::{AllocationVector, CostSpec, MarketParams, NoiseModel, TimeGrid};

/// Paths per batch. Batch `b` draws its noise from stream `b` of the seed.
pub const PATHS_PER_BATCH: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub n_paths: usize,
    pub seed: u64,
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * (other.n / n),
            m2: self.m2 + other.m2 + d * d * (self.n * other.n / n),
        }
    }
}

pub fn mc_expected_cost(
    alloc: &AllocationVector,
    params: &MarketParams,
    noise: &NoiseModel,
    spec: &CostSpec,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<McEstimate> {
    mc_expected_cost_with(
        alloc,
        params,
        noise,
        spec,
        grid,
        n_paths,
        seed,
        Execution::default(),
    )
}

/// Sample mean and standard error of the total instantaneous cost over
/// `n_paths` simulated price paths. Batches are reduced in index order, so
/// the estimate is bit-identical whatever `execution` is.
#[allow(clippy::too_many_arguments)]
pub fn mc_expected_cost_with(
    alloc: &AllocationVector,
    params: &MarketParams,
    noise: &NoiseModel,
    spec: &CostSpec,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    execution: Execution,
) -> Result<McEstimate> {
    if n_paths < 2 {
        return Err(Error::invalid(
            "paths",
            format!("need at least 2 paths, got {n_paths}"),
        ));
    }
    alloc.check(alloc.total(), grid)?;
    let n = grid.n_steps();
    let purchases = alloc.purchases();
    // cost is linear in price: f(x, u, R) = x f(1, u, R)
    let unit_costs: Vec<f64> = purchases
        .iter()
        .zip(alloc.positions())
        .enumerate()
        .map(|(k, (&u, r))| instantaneous_cost(1.0, u, r, k, n, spec))
        .collect::<Result<_>>()?;
    if unit_costs.iter().any(|c| c.is_infinite()) {
        return Ok(McEstimate {
            mean: f64::INFINITY,
            standard_error: f64::INFINITY,
            n_paths,
            seed,
        });
    }

    let n_batches = n_paths.div_ceil(PATHS_PER_BATCH);
    let batches = map_range(execution, 0, n_batches, |b| -> Result<Moments> {
        let mut draws = DrawStream::new(seed, b as u64);
        let mut m = Moments::default();
        let end = ((b + 1) * PATHS_PER_BATCH).min(n_paths);
        for _ in b * PATHS_PER_BATCH..end {
            let mut x = params.x0();
            let mut total = 0.0;
            for k in 0..=n {
                total += x * unit_costs[k];
                if k < n {
                    x = step_geometric(x, purchases[k], draws.noise(noise), params.beta())?;
                }
            }
            m.push(total);
        }
        Ok(m)
    });
    let mut acc = Moments::default();
    for m in batches {
        acc = acc.merge(m?);
    }
    let variance = acc.m2 / (acc.n - 1.0);
    Ok(McEstimate {
        mean: acc.mean,
        standard_error: (variance.max(0.0) / acc.n).sqrt(),
        n_paths,
        seed,
    })
}
