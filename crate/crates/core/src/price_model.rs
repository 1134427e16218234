//! One-step price dynamics and path simulation.
//!
//! The geometric model `x' = x (1 + h(u) + eps)` is the one every solver uses.
//! The arithmetic (Bachelier) model `x' = x + h(u) + eta eps` is kept for
//! comparison only: it can and does produce negative prices over long runs.

use crate::error::{Error, Result};
use crate::rng::DrawStream;
use crate::types::{AllocationVector, MarketParams, NoiseModel, PricePath};

/// Price drift caused by buying `u` shares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Impact {
    /// `h(u) = beta u`
    Linear { beta: f64 },
    /// `h(u) = beta u^exponent`, exponent >= 1. Only used to exercise the
    /// fiscal-cost result for other nondecreasing drifts.
    Power { beta: f64, exponent: f64 },
}

impl Impact {
    pub fn drift(&self, u: usize) -> f64 {
        match *self {
            Impact::Linear { beta } => beta * u as f64,
            Impact::Power { beta, exponent } => beta * (u as f64).powf(exponent),
        }
    }
}

/// `x (1 + beta u + eps)`; errors if the growth factor is not positive.
pub fn step_geometric(x: f64, u: usize, eps: f64, beta: f64) -> Result<f64> {
    step_with_impact(x, u, eps, Impact::Linear { beta })
}

pub fn step_with_impact(x: f64, u: usize, eps: f64, impact: Impact) -> Result<f64> {
    let factor = 1.0 + impact.drift(u) + eps;
    if factor > 0.0 {
        Ok(x * factor)
    } else {
        Err(Error::NonPositivePrice { price: x, factor })
    }
}

/// Parameters of the arithmetic model. The impact term is linear and takes
/// its coefficient from the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbmParams {
    pub eta: f64,
}

impl AbmParams {
    pub fn new(eta: f64) -> Result<Self> {
        if eta.is_finite() && eta >= 0.0 {
            Ok(Self { eta })
        } else {
            Err(Error::invalid(
                "eta",
                format!("eta must be nonnegative, got {eta}"),
            ))
        }
    }
}

/// `x + beta u + eta eps`. May go negative.
pub fn step_arithmetic(x: f64, u: usize, eps: f64, abm: AbmParams, beta: f64) -> f64 {
    x + beta * u as f64 + abm.eta * eps
}

/// Prices along a fixed schedule: `prices[0] = x0`, then one geometric step
/// per interval with noise drawn from stream 0 of `seed`.
pub fn simulate_path(
    k_shares: usize,
    alloc: &AllocationVector,
    params: &MarketParams,
    noise: &NoiseModel,
    seed: u64,
) -> Result<PricePath> {
    if alloc.total() != k_shares {
        return Err(Error::invalid(
            "allocation",
            format!("purchases sum to {}, expected {k_shares}", alloc.total()),
        ));
    }
    if alloc.is_empty() {
        return Err(Error::LengthMismatch("allocation is empty".into()));
    }
    let mut draws = DrawStream::new(seed, 0);
    let mut prices = Vec::with_capacity(alloc.len());
    let mut x = params.x0();
    prices.push(x);
    for &u in &alloc.purchases()[..alloc.len() - 1] {
        x = step_geometric(x, u, draws.noise(noise), params.beta())?;
        prices.push(x);
    }
    PricePath::new(prices)
}

/// Outcome of iterating the arithmetic model with no purchases.
#[derive(Debug, Clone, PartialEq)]
pub struct ArithmeticRun {
    pub prices: Vec<f64>,
    /// First step index whose price is negative, if any.
    pub first_negative: Option<usize>,
    pub negative_steps: usize,
}

/// Iterates [`step_arithmetic`] for `n_steps` with zero purchases, drawing
/// noise from stream 0 of `seed`, and records where prices went negative.
pub fn simulate_arithmetic(
    x0: f64,
    n_steps: usize,
    abm: AbmParams,
    noise: &NoiseModel,
    seed: u64,
) -> ArithmeticRun {
    let mut draws = DrawStream::new(seed, 0);
    let mut prices = Vec::with_capacity(n_steps + 1);
    let mut x = x0;
    prices.push(x);
    for _ in 0..n_steps {
        x = step_arithmetic(x, 0, draws.noise(noise), abm, 0.0);
        prices.push(x);
    }
    let first_negative = prices.iter().position(|&p| p < 0.0);
    let negative_steps = prices.iter().filter(|&&p| p < 0.0).count();
    ArithmeticRun {
        prices,
        first_negative,
        negative_steps,
    }
}
