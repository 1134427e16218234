//! Instantaneous cost `f(x, u, R)` at decision point `k`.
//!
//! The constrained cost adds two log-barrier penalties on the fractional
//! consumption `u / R`:
//!
//! ```text
//! f = x u - x C_l (k/N)^g ln(1 - max(0, LB - u/R))
//!         - x C_u (N/k)^g ln(1 - max(0, u/R - UB))
//! ```
//!
//! A penalty whose violation is exactly zero contributes exactly zero,
//! whatever its weight. At `k = 0` the upper weight is unbounded, so any
//! positive upper violation there costs `+inf`; the lower weight is zero.
//! At `k = N` the remaining block is bought outright and the cost is fiscal.

use crate::error::{Error, Result};
use crate::types::{BarrierParams, CostSpec};

pub fn fiscal_cost(x: f64, u: usize) -> f64 {
    x * u as f64
}

/// Penalty weights of one decision point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LayerWeights {
    lower: f64,
    upper: f64,
}

impl LayerWeights {
    pub(crate) fn new(k: usize, n: usize, b: &BarrierParams) -> Self {
        let (lower, upper) = if k == 0 {
            (0.0, f64::INFINITY)
        } else {
            let ratio = k as f64 / n as f64;
            (
                b.c_lower * ratio.powf(b.gamma),
                b.c_upper * ratio.recip().powf(b.gamma),
            )
        };
        Self { lower, upper }
    }

    /// Barrier penalty at unit price. Requires `0 <= u <= r`, `r > 0`.
    pub(crate) fn penalty(&self, u: usize, r: usize, b: &BarrierParams) -> f64 {
        let frac = u as f64 / r as f64;
        let mut total = 0.0;
        let below = b.lb - frac;
        if below > 0.0 {
            total -= self.lower * (-below).ln_1p();
        }
        let above = frac - b.ub;
        if above > 0.0 {
            total -= self.upper * (-above).ln_1p();
        }
        total
    }
}

/// The constrained cost. Returns `+inf` for an upper-bound violation at
/// `k = 0`; errors if `u > R`, `R = 0` or `k > N`.
pub fn constrained_cost(
    x: f64,
    u: usize,
    r: usize,
    k: usize,
    n: usize,
    barrier: &BarrierParams,
) -> Result<f64> {
    check_domain(u, r, k, n)?;
    if k == n {
        return Ok(fiscal_cost(x, u));
    }
    let w = LayerWeights::new(k, n, barrier);
    Ok(x * (u as f64 + w.penalty(u, r, barrier)))
}

/// Dispatches on the cost regime. `r = 0` is allowed only with `u = 0` and
/// costs nothing.
pub fn instantaneous_cost(
    x: f64,
    u: usize,
    r: usize,
    k: usize,
    n: usize,
    spec: &CostSpec,
) -> Result<f64> {
    match spec {
        CostSpec::Fiscal => {
            if u > r {
                return Err(Error::Domain(format!("action {u} exceeds position {r}")));
            }
            Ok(fiscal_cost(x, u))
        }
        CostSpec::Constrained(_) if r == 0 && u == 0 => Ok(0.0),
        CostSpec::Constrained(b) => constrained_cost(x, u, r, k, n, b),
    }
}

fn check_domain(u: usize, r: usize, k: usize, n: usize) -> Result<()> {
    if u > r {
        return Err(Error::Domain(format!("action {u} exceeds position {r}")));
    }
    if r == 0 {
        return Err(Error::Domain("position must be positive".into()));
    }
    if k > n {
        return Err(Error::Domain(format!("time index {k} beyond horizon {n}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const REF: BarrierParams = BarrierParams::REFERENCE;

    #[test]
    fn fiscal_examples() {
        assert_eq!(fiscal_cost(100.0, 0), 0.0);
        assert_eq!(fiscal_cost(100.0, 10), 1000.0);
        assert!((fiscal_cost(7.197, 100) - 719.7).abs() < 1e-12);
    }

    #[test]
    fn in_band_is_purely_fiscal() {
        for k in 1..10 {
            assert_eq!(constrained_cost(1.0, 40, 100, k, 10, &REF).unwrap(), 40.0);
        }
    }

    // Frozen values from a 30-digit evaluation (mpmath):
    //   -1000 * 0.25 * ln(0.8)  = 55.785887828552...
    //   80 - 10 * 4 * ln(0.8)   = 88.925742052568...
    #[test]
    fn barrier_values_at_half_horizon() {
        let lower = constrained_cost(1.0, 0, 100, 5, 10, &REF).unwrap();
        assert!((lower - 55.785_887_828_552).abs() < 1e-4, "{lower}");
        let upper = constrained_cost(1.0, 80, 100, 5, 10, &REF).unwrap();
        assert!((upper - 88.925_742_052_568).abs() < 1e-4, "{upper}");
    }

    #[test]
    fn first_point_conventions() {
        // exact UB consumption is free, anything above is rejected
        assert_eq!(
            constrained_cost(1.0, 600, 1000, 0, 10, &REF).unwrap(),
            600.0
        );
        assert_eq!(
            constrained_cost(1.0, 601, 1000, 0, 10, &REF).unwrap(),
            f64::INFINITY
        );
        // lower weight is zero at k = 0
        assert_eq!(constrained_cost(1.0, 0, 1000, 0, 10, &REF).unwrap(), 0.0);
    }

    #[test]
    fn horizon_is_fiscal() {
        assert_eq!(constrained_cost(2.0, 7, 7, 10, 10, &REF).unwrap(), 14.0);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            constrained_cost(1.0, 5, 4, 1, 10, &REF),
            Err(Error::Domain(_))
        ));
        assert!(constrained_cost(1.0, 0, 0, 1, 10, &REF).is_err());
        assert!(constrained_cost(1.0, 0, 1, 11, 10, &REF).is_err());
        let spec = CostSpec::Constrained(REF);
        assert_eq!(instantaneous_cost(3.0, 0, 0, 2, 10, &spec).unwrap(), 0.0);
        assert!(instantaneous_cost(3.0, 2, 1, 2, 10, &CostSpec::Fiscal).is_err());
    }

    #[test]
    fn lower_penalty_grows_with_k_upper_shrinks() {
        let mut last_lower = 0.0;
        let mut last_upper = f64::INFINITY;
        for k in 0..10 {
            let lower = constrained_cost(1.0, 10, 100, k, 10, &REF).unwrap() - 10.0;
            let upper = constrained_cost(1.0, 90, 100, k, 10, &REF).unwrap() - 90.0;
            assert!(lower >= last_lower);
            assert!(upper <= last_upper);
            last_lower = lower;
            last_upper = upper;
        }
    }

    fn arb_barrier() -> impl Strategy<Value = BarrierParams> {
        (
            0.1f64..2000.0,
            0.1f64..100.0,
            0.1f64..4.0,
            0.0f64..0.5,
            0.5f64..1.0,
        )
            .prop_map(|(c_lower, c_upper, gamma, lb, ub)| BarrierParams {
                c_lower,
                c_upper,
                gamma,
                lb,
                ub,
            })
    }

    proptest! {
        #[test]
        fn homogeneous_in_price(
            b in arb_barrier(),
            r in 1usize..2000,
            frac in 0.0f64..=1.0,
            n in 1usize..200,
            kf in 0.0f64..1.0,
            x in 0.01f64..1e4,
        ) {
            let u = ((r as f64) * frac).floor() as usize;
            let k = ((n as f64) * kf) as usize;
            let base = constrained_cost(x, u, r, k, n, &b).unwrap();
            for lambda in [0.5, 2.0, 10.0] {
                let scaled = constrained_cost(lambda * x, u, r, k, n, &b).unwrap();
                if base.is_infinite() {
                    prop_assert!(scaled.is_infinite());
                } else {
                    prop_assert!((scaled - lambda * base).abs() <= 1e-12 * scaled.abs().max(1.0));
                }
            }
            prop_assert!(base >= fiscal_cost(x, u));
        }
    }
}
