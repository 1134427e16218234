use crate::cost::instantaneous_cost;
use crate::error::{Error, Result};
use crate::par::map_range;
use crate::price_model::Impact;
use crate::types::{validate_problem, CostSpec, MarketParams, NoiseModel, TimeGrid};

use super::{within_tie, SolveOptions, TIE_RTOL};

/// Cost-to-go and optimal action over time x price grid x position.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularSolution {
    n_steps: usize,
    prices: Vec<f64>,
    capacity: usize,
    value: Vec<f64>,
    action: Vec<usize>,
}

impl TabularSolution {
    fn idx(&self, k: usize, m: usize, r: usize) -> usize {
        assert!(k <= self.n_steps && m < self.prices.len() && r <= self.capacity);
        (k * self.prices.len() + m) * (self.capacity + 1) + r
    }

    pub fn value(&self, k: usize, m: usize, r: usize) -> f64 {
        self.value[self.idx(k, m, r)]
    }

    pub fn action(&self, k: usize, m: usize, r: usize) -> usize {
        self.action[self.idx(k, m, r)]
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// `(N + 1, |X|, K + 1)`
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n_steps + 1, self.prices.len(), self.capacity + 1)
    }

    /// Grid index the solver uses for a transitioned price.
    pub fn project(&self, price: f64) -> usize {
        nearest(&self.prices, price)
    }
}

/// Nearest grid point, ties to the lower index. `grid` must be increasing.
fn nearest(grid: &[f64], price: f64) -> usize {
    let upper = grid.partition_point(|&g| g < price);
    if upper == 0 {
        0
    } else if upper == grid.len() {
        grid.len() - 1
    } else if price - grid[upper - 1] <= grid[upper] - price {
        upper - 1
    } else {
        upper
    }
}

/// Full-state backward induction under linear impact `h(u) = beta u`.
pub fn solve_tabular(
    x_grid: &[f64],
    k_shares: usize,
    grid: TimeGrid,
    params: MarketParams,
    noise: &NoiseModel,
    spec: CostSpec,
    opts: &SolveOptions,
) -> Result<TabularSolution> {
    let impact = Impact::Linear {
        beta: params.beta(),
    };
    solve_tabular_with_impact(x_grid, k_shares, grid, params, noise, spec, impact, opts)
}

/// Full-state backward induction for an arbitrary drift `h(u)`.
///
/// Terminal layer: `J[N][x][r] = x r`. Interior cells minimise
/// `sum_i p_i (f(x, u, r) + J[k+1][proj(x (1 + h(u) + eps_i))][r - u])`
/// over `u = 0..=r`, where `proj` snaps to the nearest grid price. Values
/// within [`TIE_RTOL`] (or [`SolveOptions::tie_rtol`]) of the incumbent count
/// as ties and the larger action wins.
#[allow(clippy::too_many_arguments)]
pub fn solve_tabular_with_impact(
    x_grid: &[f64],
    k_shares: usize,
    grid: TimeGrid,
    params: MarketParams,
    noise: &NoiseModel,
    spec: CostSpec,
    impact: Impact,
    opts: &SolveOptions,
) -> Result<TabularSolution> {
    validate_problem(k_shares, grid, params, spec)?;
    if x_grid.is_empty() {
        return Err(Error::invalid("x_grid", "price grid is empty"));
    }
    if x_grid.iter().any(|&x| !(x.is_finite() && x > 0.0))
        || x_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::invalid(
            "x_grid",
            "prices must be positive and strictly increasing",
        ));
    }
    let n = grid.n_steps();
    let width = k_shares + 1;
    let layer_len = x_grid.len() * width;
    let work = x_grid.len() as u128
        * noise.support().len() as u128
        * (k_shares as u128).pow(2)
        * n as u128;
    opts.check(work, layer_len as u128 * grid.n_points() as u128)?;

    let tie = opts.tie_rtol.unwrap_or(TIE_RTOL);

    let mut value = vec![0f64; layer_len * (n + 1)];
    let mut action = vec![0usize; layer_len * (n + 1)];
    for (m, &x) in x_grid.iter().enumerate() {
        for r in 0..width {
            let i = (n * x_grid.len() + m) * width + r;
            value[i] = x * r as f64;
            action[i] = r;
        }
    }

    for k in (0..n).rev() {
        let (head, tail) = value.split_at_mut((k + 1) * layer_len);
        let next = &tail[..layer_len];
        let cells = map_range(
            opts.execution,
            0,
            layer_len,
            |cell| -> Result<(usize, f64)> {
                let (m, r) = (cell / width, cell % width);
                if r == 0 {
                    return Ok((0, 0.0));
                }
                let x = x_grid[m];
                let mut best: Option<(usize, f64)> = None;
                for u in 0..=r {
                    let f = instantaneous_cost(x, u, r, k, n, &spec)?;
                    let growth = 1.0 + impact.drift(u);
                    let mut val = 0.0;
                    for &(eps, p) in noise.support() {
                        let j = nearest(x_grid, x * (growth + eps));
                        val += p * (f + next[j * width + r - u]);
                    }
                    match best {
                        Some((_, b)) if !within_tie(val, b, tie) => {}
                        _ => best = Some((u, val)),
                    }
                }
                Ok(best.expect("r >= 1 so at least one action"))
            },
        );
        let value_row = &mut head[k * layer_len..];
        let action_row = &mut action[k * layer_len..(k + 1) * layer_len];
        for (cell, res) in cells.into_iter().enumerate() {
            let (u, v) = res?;
            action_row[cell] = u;
            value_row[cell] = v;
        }
    }

    Ok(TabularSolution {
        n_steps: n,
        prices: x_grid.to_vec(),
        capacity: k_shares,
        value,
        action,
    })
}
