//! Domain types shared by the solvers, the price model and the evaluators.
//!
//! Everything here is immutable after construction. Constructors check the
//! type's own invariants; [`validate_problem`] checks a whole problem at once
//! and reports every violation rather than the first.

use crate::error::{Error, Result, Violation};

/// Largest block size accepted by [`validate_problem`].
pub const MAX_SHARES: usize = 1_000_000;
/// Largest number of intervals accepted by [`validate_problem`].
pub const MAX_STEPS: usize = 10_000;

/// Tolerance used for the noise distribution's normalisation and zero mean.
pub const NOISE_TOLERANCE: f64 = 1e-12;
/// Every noise value must satisfy `|eps| < NOISE_BOUND`.
pub const NOISE_BOUND: f64 = 0.5;

/// Uniform partition `t_k = k * T / N`, `k = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    n_steps: usize,
    horizon: f64,
}

impl TimeGrid {
    pub fn new(n_steps: usize, horizon: f64) -> Result<Self> {
        let grid = Self { n_steps, horizon };
        let v = grid.violations();
        if v.is_empty() {
            Ok(grid)
        } else {
            Err(Error::InvalidParameter(v))
        }
    }

    /// Grid with unit spacing, `T = N`.
    pub fn with_steps(n_steps: usize) -> Result<Self> {
        Self::new(n_steps, n_steps as f64)
    }

    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.n_steps < 1 {
            v.push(Violation::new("n", "N must be at least 1"));
        }
        if self.n_steps > MAX_STEPS {
            v.push(Violation::new(
                "n",
                format!("N = {} exceeds the cap of {MAX_STEPS}", self.n_steps),
            ));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            v.push(Violation::new(
                "horizon",
                format!("T must be positive and finite, got {}", self.horizon),
            ));
        }
        v
    }

    /// Number of intervals N. There are N + 1 decision points.
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_points(&self) -> usize {
        self.n_steps + 1
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Time of grid point `k`. `time(0) == 0` and `time(N) == T` exactly.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.horizon
        } else {
            k as f64 * (self.horizon / self.n_steps as f64)
        }
    }

    /// `t_k / t_N`, computed as `k / N` so that the cost weights do not pick
    /// up rounding from `T`.
    pub fn fraction(&self, k: usize) -> f64 {
        k as f64 / self.n_steps as f64
    }
}

/// Impact coefficient and starting price of the geometric model
/// `x_{k+1} = x_k (1 + beta u_k + eps_k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    beta: f64,
    x0: f64,
}

impl MarketParams {
    pub fn new(beta: f64, x0: f64) -> Result<Self> {
        let p = Self { beta, x0 };
        let v = p.violations();
        if v.is_empty() {
            Ok(p)
        } else {
            Err(Error::InvalidParameter(v))
        }
    }

    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.beta >= 0.0 && self.beta < 1.0) {
            v.push(Violation::new(
                "beta",
                format!("beta must lie in [0, 1), got {}", self.beta),
            ));
        }
        if !(self.x0.is_finite() && self.x0 > 0.0) {
            v.push(Violation::new(
                "x0",
                format!("initial price must be positive, got {}", self.x0),
            ));
        }
        v
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// True when beta lies in the commonly used range [1e-5, 1e-4].
    pub fn beta_in_recommended_range(&self) -> bool {
        (1e-5..=1e-4).contains(&self.beta)
    }
}

/// Finite zero-mean distribution of the multiplicative price noise.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    support: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
}

impl NoiseModel {
    /// Builds a noise model from `(value, probability)` pairs. Draws map to the
    /// support by cumulative probability in the order given here.
    pub fn new(support: Vec<(f64, f64)>) -> Result<Self> {
        let v = Self::violations(&support);
        if !v.is_empty() {
            return Err(Error::InvalidParameter(v));
        }
        let mut acc = 0.0;
        let cumulative = support
            .iter()
            .map(|&(_, p)| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            support,
            cumulative,
        })
    }

    /// Point mass at zero.
    pub fn zero() -> Self {
        Self::new(vec![(0.0, 1.0)]).expect("point mass at zero is valid")
    }

    /// Two-point noise `{+a, -a}` with probability 1/2 each.
    pub fn symmetric(a: f64) -> Result<Self> {
        Self::new(vec![(a, 0.5), (-a, 0.5)])
    }

    fn violations(support: &[(f64, f64)]) -> Vec<Violation> {
        let mut v = Vec::new();
        if support.is_empty() {
            v.push(Violation::new("noise", "support must not be empty"));
            return v;
        }
        for (i, &(eps, p)) in support.iter().enumerate() {
            if !(p.is_finite() && p > 0.0) {
                v.push(Violation::new(
                    "noise",
                    format!("probability #{i} must be positive, got {p}"),
                ));
            }
            if !(eps.is_finite() && eps.abs() < NOISE_BOUND) {
                v.push(Violation::new(
                    "noise",
                    format!("value #{i} must satisfy |eps| < {NOISE_BOUND}, got {eps}"),
                ));
            }
        }
        let total: f64 = support.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > NOISE_TOLERANCE {
            v.push(Violation::new(
                "noise",
                format!("probabilities sum to {total}, not 1"),
            ));
        }
        let mean: f64 = support.iter().map(|&(e, p)| e * p).sum();
        if mean.abs() > NOISE_TOLERANCE {
            v.push(Violation::new(
                "noise",
                format!("mean must be zero, got {mean}"),
            ));
        }
        v
    }

    pub fn support(&self) -> &[(f64, f64)] {
        &self.support
    }

    pub fn is_degenerate(&self) -> bool {
        self.support.iter().all(|&(e, _)| e == 0.0)
    }

    /// Maps a uniform draw in `[0, 1)` onto the support: the first value whose
    /// cumulative probability exceeds `uniform`. Rounding slack at the top end
    /// falls to the last value.
    pub fn value_at(&self, uniform: f64) -> f64 {
        let idx = self
            .cumulative
            .iter()
            .position(|&c| uniform < c)
            .unwrap_or(self.support.len() - 1);
        self.support[idx].0
    }
}

/// Parameters of the log-barrier penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    pub c_lower: f64,
    pub c_upper: f64,
    pub gamma: f64,
    pub lb: f64,
    pub ub: f64,
}

impl BarrierParams {
    /// The parameter set of the reference schedules:
    /// `C_l = 1000, C_u = 10, gamma = 2, LB = 0.2, UB = 0.6`.
    pub const REFERENCE: BarrierParams = BarrierParams {
        c_lower: 1000.0,
        c_upper: 10.0,
        gamma: 2.0,
        lb: 0.2,
        ub: 0.6,
    };

    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.c_lower) {
            v.push(Violation::new(
                "cl",
                format!("C_l must be positive, got {}", self.c_lower),
            ));
        }
        if !positive(self.c_upper) {
            v.push(Violation::new(
                "cu",
                format!("C_u must be positive, got {}", self.c_upper),
            ));
        }
        if !positive(self.gamma) {
            v.push(Violation::new(
                "gamma",
                format!("gamma must be positive, got {}", self.gamma),
            ));
        }
        if !(0.0..1.0).contains(&self.lb) {
            v.push(Violation::new(
                "lb",
                format!("LB must lie in [0, 1), got {}", self.lb),
            ));
        }
        if !(self.ub > 0.0 && self.ub <= 1.0) {
            v.push(Violation::new(
                "ub",
                format!("UB must lie in (0, 1], got {}", self.ub),
            ));
        }
        if self.lb.partial_cmp(&self.ub) != Some(std::cmp::Ordering::Less) {
            v.push(Violation::new(
                "lb",
                format!("LB < UB violated (LB = {}, UB = {})", self.lb, self.ub),
            ));
        }
        v
    }
}

/// Which instantaneous cost the objective charges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostSpec {
    /// `f(x, u, R) = x u`
    Fiscal,
    /// Fiscal cost plus log-barrier penalties on `u / R` outside `[LB, UB]`.
    Constrained(BarrierParams),
}

impl CostSpec {
    pub fn constrained(c_lower: f64, c_upper: f64, gamma: f64, lb: f64, ub: f64) -> Result<Self> {
        let spec = CostSpec::Constrained(BarrierParams {
            c_lower,
            c_upper,
            gamma,
            lb,
            ub,
        });
        let v = spec.violations();
        if v.is_empty() {
            Ok(spec)
        } else {
            Err(Error::InvalidParameter(v))
        }
    }

    fn violations(&self) -> Vec<Violation> {
        match self {
            CostSpec::Fiscal => Vec::new(),
            CostSpec::Constrained(b) => b.violations(),
        }
    }

    pub fn is_fiscal(&self) -> bool {
        matches!(self, CostSpec::Fiscal)
    }
}

/// Purchase schedule `u_0 ..= u_N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AllocationVector(Vec<usize>);

impl AllocationVector {
    pub fn new(purchases: Vec<usize>) -> Self {
        Self(purchases)
    }

    pub fn zeros(n_points: usize) -> Self {
        Self(vec![0; n_points])
    }

    pub fn purchases(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Remaining position before each purchase: `R_0 = K`, `R_{k+1} = R_k - u_k`.
    pub fn positions(&self) -> Vec<usize> {
        let mut remaining = self.total();
        self.0
            .iter()
            .map(|&u| {
                let r = remaining;
                remaining -= u;
                r
            })
            .collect()
    }

    /// Checks the budget constraint `sum u_k = K` and the length `N + 1`.
    pub fn check(&self, k_shares: usize, grid: &TimeGrid) -> Result<()> {
        if self.len() != grid.n_points() {
            return Err(Error::LengthMismatch(format!(
                "allocation has {} entries, grid has {} decision points",
                self.len(),
                grid.n_points()
            )));
        }
        if self.total() != k_shares {
            return Err(Error::invalid(
                "allocation",
                format!("purchases sum to {}, expected {k_shares}", self.total()),
            ));
        }
        Ok(())
    }
}

impl From<Vec<usize>> for AllocationVector {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// A series of observed or simulated prices, optionally labelled by date.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePath {
    prices: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl PricePath {
    pub fn new(prices: Vec<f64>) -> Result<Self> {
        Self::build(prices, None)
    }

    pub fn with_labels(prices: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != prices.len() {
            return Err(Error::LengthMismatch(format!(
                "{} labels for {} prices",
                labels.len(),
                prices.len()
            )));
        }
        Self::build(prices, Some(labels))
    }

    fn build(prices: Vec<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        if prices.is_empty() {
            return Err(Error::Data("price path is empty".into()));
        }
        if let Some((i, p)) = prices
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p > 0.0))
        {
            return Err(Error::Data(format!("price #{i} is not positive: {p}")));
        }
        Ok(Self { prices, labels })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// Multiplies every price by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::build(
            self.prices.iter().map(|p| p * factor).collect(),
            self.labels.clone(),
        )
    }

    /// Keeps the first `n` prices.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        let n = n.min(self.len());
        Self::build(
            self.prices[..n].to_vec(),
            self.labels.as_ref().map(|l| l[..n].to_vec()),
        )
    }
}

/// A problem whose parts have been checked together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem {
    pub k_shares: usize,
    pub grid: TimeGrid,
    pub params: MarketParams,
    pub spec: CostSpec,
}

/// Checks every invariant of the block size, grid, market parameters and
/// cost spec, collecting all violations into one error.
pub fn validate_problem(
    k_shares: usize,
    grid: TimeGrid,
    params: MarketParams,
    spec: CostSpec,
) -> Result<Problem> {
    let mut v = Vec::new();
    if k_shares > MAX_SHARES {
        v.push(Violation::new(
            "k",
            format!("K = {k_shares} exceeds the cap of {MAX_SHARES}"),
        ));
    }
    v.extend(grid.violations());
    v.extend(params.violations());
    v.extend(spec.violations());
    if v.is_empty() {
        Ok(Problem {
            k_shares,
            grid,
            params,
            spec,
        })
    } else {
        Err(Error::InvalidParameter(v))
    }
}

impl Problem {
    pub fn revalidate(&self) -> Result<Problem> {
        validate_problem(self.k_shares, self.grid, self.params, self.spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> (TimeGrid, MarketParams, CostSpec) {
        (
            TimeGrid::with_steps(10).unwrap(),
            MarketParams::new(5e-5, 1.0).unwrap(),
            CostSpec::Constrained(BarrierParams::REFERENCE),
        )
    }

    #[test]
    fn reference_problem_validates() {
        let (g, p, s) = reference();
        let problem = validate_problem(1000, g, p, s).unwrap();
        assert_eq!(problem.revalidate().unwrap(), problem);
        assert!(p.beta_in_recommended_range());
    }

    #[test]
    fn empty_budget_is_legal() {
        let (g, p, s) = reference();
        assert!(validate_problem(0, g, p, s).is_ok());
    }

    #[test]
    fn inverted_bounds_rejected() {
        let err = CostSpec::constrained(1000.0, 10.0, 2.0, 0.7, 0.6).unwrap_err();
        match err {
            Error::InvalidParameter(v) => {
                assert!(v.iter().any(|x| x.message.contains("LB < UB")), "{v:?}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn violations_are_aggregated() {
        let bad_spec = CostSpec::Constrained(BarrierParams {
            c_lower: -1.0,
            c_upper: 0.0,
            gamma: 2.0,
            lb: 0.7,
            ub: 0.6,
        });
        let bad_params = MarketParams {
            beta: 1.5,
            x0: -2.0,
        };
        let bad_grid = TimeGrid {
            n_steps: 0,
            horizon: 1.0,
        };
        match validate_problem(2_000_000, bad_grid, bad_params, bad_spec).unwrap_err() {
            Error::InvalidParameter(v) => {
                let fields: Vec<_> = v.iter().map(|x| x.field).collect();
                for f in ["k", "n", "beta", "x0", "cl", "cu", "lb"] {
                    assert!(fields.contains(&f), "missing {f} in {fields:?}");
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn time_map_is_exact() {
        let g = TimeGrid::new(7, 0.3).unwrap();
        assert_eq!(g.time(0), 0.0);
        assert_eq!(g.time(7), 0.3);
        for k in 0..=7 {
            assert_eq!(g.fraction(k), k as f64 / 7.0);
        }
        assert!(TimeGrid::new(0, 1.0).is_err());
        assert!(TimeGrid::new(3, 0.0).is_err());
    }

    #[test]
    fn noise_invariants() {
        assert!(NoiseModel::symmetric(0.01).is_ok());
        assert!(NoiseModel::new(vec![(0.01, 0.5), (0.0, 0.5)]).is_err()); // biased
        assert!(NoiseModel::new(vec![(0.6, 0.5), (-0.6, 0.5)]).is_err()); // too wide
        assert!(NoiseModel::new(vec![(0.1, 0.5), (-0.1, 0.4)]).is_err()); // mass
        assert!(NoiseModel::new(vec![]).is_err());
        assert!(NoiseModel::zero().is_degenerate());
    }

    #[test]
    fn noise_draw_mapping_follows_listed_order() {
        let n = NoiseModel::new(vec![(0.02, 0.25), (-0.01, 0.5), (0.0, 0.25)]).unwrap();
        assert_eq!(n.value_at(0.0), 0.02);
        assert_eq!(n.value_at(0.2499), 0.02);
        assert_eq!(n.value_at(0.25), -0.01);
        assert_eq!(n.value_at(0.7499), -0.01);
        assert_eq!(n.value_at(0.75), 0.0);
        assert_eq!(n.value_at(0.999_999_999), 0.0);
    }

    #[test]
    fn allocation_positions_and_budget() {
        let a = AllocationVector::new(vec![3, 0, 2, 1]);
        assert_eq!(a.positions(), vec![6, 3, 3, 1]);
        let g = TimeGrid::with_steps(3).unwrap();
        assert!(a.check(6, &g).is_ok());
        assert!(a.check(5, &g).is_err());
        assert!(a.check(6, &TimeGrid::with_steps(4).unwrap()).is_err());
    }

    #[test]
    fn price_path_rejects_nonpositive() {
        assert!(PricePath::new(vec![]).is_err());
        assert!(PricePath::new(vec![1.0, 0.0]).is_err());
        assert!(PricePath::new(vec![1.0, -3.0]).is_err());
        assert!(PricePath::with_labels(vec![1.0], vec![]).is_err());
    }
}
