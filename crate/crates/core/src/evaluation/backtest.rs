use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::fmt::significant;
use crate::par::Execution;
use crate::types::{AllocationVector, CostSpec, MarketParams, NoiseModel, PricePath, TimeGrid};

use super::montecarlo::mc_expected_cost_with;

pub const REPORT_CSV_HEADER: &str = "strategy,total_cost,ratio_vs_baseline";

/// Total expenditure `sum_k u_k p_k` at the recorded prices.
pub fn execute_on_path(path: &PricePath, alloc: &AllocationVector) -> Result<f64> {
    check_length(path, alloc)?;
    Ok(path
        .prices()
        .iter()
        .zip(alloc.purchases())
        .map(|(&p, &u)| p * u as f64)
        .sum())
}

/// Like [`execute_on_path`] but with each recorded price scaled by the drift
/// of our own earlier purchases, `prod_{j<k} (1 + beta u_j)`. Not part of the
/// recorded-price methodology; offered as a sensitivity check.
pub fn execute_on_path_with_impact(
    path: &PricePath,
    alloc: &AllocationVector,
    beta: f64,
) -> Result<f64> {
    check_length(path, alloc)?;
    let mut drift = 1.0;
    let mut total = 0.0;
    for (&p, &u) in path.prices().iter().zip(alloc.purchases()) {
        total += p * drift * u as f64;
        drift *= 1.0 + beta * u as f64;
    }
    Ok(total)
}

fn check_length(path: &PricePath, alloc: &AllocationVector) -> Result<()> {
    if path.len() < alloc.len() {
        return Err(Error::LengthMismatch(format!(
            "price path has {} prices, allocation needs {}",
            path.len(),
            alloc.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedAllocation {
    pub name: String,
    pub allocation: AllocationVector,
}

impl NamedAllocation {
    pub fn new(name: impl Into<String>, allocation: AllocationVector) -> Self {
        Self {
            name: name.into(),
            allocation,
        }
    }
}

/// How strategies are costed.
#[derive(Debug, Clone)]
pub enum EvaluationMode<'a> {
    /// Recorded prices, optionally with our own impact applied.
    Historical {
        path: &'a PricePath,
        source: String,
        impact_beta: Option<f64>,
    },
    /// Monte-Carlo under the geometric model.
    Model {
        params: MarketParams,
        noise: NoiseModel,
        spec: CostSpec,
        grid: TimeGrid,
        n_paths: usize,
        seed: u64,
        execution: Execution,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub strategy: String,
    pub total_cost: f64,
    /// Present in model mode.
    pub standard_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostRatio {
    pub numerator: String,
    pub denominator: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportMetadata {
    pub source: String,
    pub date_range: Option<(String, String)>,
    pub k_shares: usize,
    pub n_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub rows: Vec<ReportRow>,
    /// `cost(row) / cost(baseline)` for every row, in row order.
    pub ratios: Vec<CostRatio>,
    pub baseline: String,
    pub metadata: ReportMetadata,
}

/// Costs every strategy and divides each by the baseline's cost. The
/// baseline defaults to `bertsimas` when such a strategy is present, and to
/// the first strategy otherwise.
pub fn compare(
    mode: &EvaluationMode<'_>,
    strategies: &[NamedAllocation],
    baseline: Option<&str>,
) -> Result<BacktestReport> {
    let first = strategies
        .first()
        .ok_or_else(|| Error::invalid("strategies", "no strategies given"))?;
    let k_shares = first.allocation.total();
    let n_points = first.allocation.len();
    if n_points < 2 {
        return Err(Error::invalid(
            "strategies",
            "allocations need at least 2 decision points",
        ));
    }
    for s in strategies {
        if s.allocation.total() != k_shares || s.allocation.len() != n_points {
            return Err(Error::invalid(
                "strategies",
                format!(
                    "`{}` has K = {}, N = {}; expected K = {k_shares}, N = {}",
                    s.name,
                    s.allocation.total(),
                    s.allocation.len() - 1,
                    n_points - 1
                ),
            ));
        }
    }
    let baseline = match baseline {
        Some(b) => strategies
            .iter()
            .position(|s| s.name == b)
            .ok_or_else(|| Error::invalid("baseline", format!("no strategy named `{b}`")))?,
        None => strategies
            .iter()
            .position(|s| s.name == "bertsimas")
            .unwrap_or(0),
    };

    let mut rows = Vec::with_capacity(strategies.len());
    for s in strategies {
        let (total_cost, standard_error) = match mode {
            EvaluationMode::Historical {
                path, impact_beta, ..
            } => {
                let c = match impact_beta {
                    Some(beta) => execute_on_path_with_impact(path, &s.allocation, *beta)?,
                    None => execute_on_path(path, &s.allocation)?,
                };
                (c, None)
            }
            EvaluationMode::Model {
                params,
                noise,
                spec,
                grid,
                n_paths,
                seed,
                execution,
            } => {
                let est = mc_expected_cost_with(
                    &s.allocation,
                    params,
                    noise,
                    spec,
                    grid,
                    *n_paths,
                    *seed,
                    *execution,
                )?;
                (est.mean, Some(est.standard_error))
            }
        };
        rows.push(ReportRow {
            strategy: s.name.clone(),
            total_cost,
            standard_error,
        });
    }

    let base_cost = rows[baseline].total_cost;
    let ratios = rows
        .iter()
        .map(|r| CostRatio {
            numerator: r.strategy.clone(),
            denominator: rows[baseline].strategy.clone(),
            value: r.total_cost / base_cost,
        })
        .collect();

    let metadata = match mode {
        EvaluationMode::Historical { path, source, .. } => ReportMetadata {
            source: source.clone(),
            date_range: path
                .labels()
                .map(|l| (l[0].clone(), l[n_points - 1].clone())),
            k_shares,
            n_steps: n_points - 1,
        },
        EvaluationMode::Model { n_paths, seed, .. } => ReportMetadata {
            source: format!("model ({n_paths} paths, seed {seed})"),
            date_range: None,
            k_shares,
            n_steps: n_points - 1,
        },
    };

    Ok(BacktestReport {
        rows,
        ratios,
        baseline: strategies[baseline].name.clone(),
        metadata,
    })
}

impl BacktestReport {
    pub fn ratio(&self, strategy: &str) -> Option<f64> {
        self.ratios
            .iter()
            .find(|r| r.numerator == strategy)
            .map(|r| r.value)
    }

    /// Plain-text table: costs to 2 decimals, ratios to 5.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let m = &self.metadata;
        let _ = write!(out, "source: {}", m.source);
        if let Some((a, b)) = &m.date_range {
            let _ = write!(out, "  dates: {a} .. {b}");
        }
        let _ = writeln!(out, "  K = {}  N = {}", m.k_shares, m.n_steps);
        let with_se = self.rows.iter().any(|r| r.standard_error.is_some());
        let name_w = self
            .rows
            .iter()
            .map(|r| r.strategy.len())
            .max()
            .unwrap_or(0)
            .max("Strategy".len());
        let ratio_head = format!("Ratio (vs {})", self.baseline);
        let _ = write!(out, "{:<name_w$}  {:>18}", "Strategy", "Investment Cost");
        if with_se {
            let _ = write!(out, "  {:>14}", "Std Error");
        }
        let _ = writeln!(out, "  {ratio_head:>w$}", w = ratio_head.len().max(10));
        for (row, ratio) in self.rows.iter().zip(&self.ratios) {
            let _ = write!(out, "{:<name_w$}  {:>18.2}", row.strategy, row.total_cost);
            if with_se {
                let _ = write!(out, "  {:>14.4}", row.standard_error.unwrap_or(0.0));
            }
            let _ = writeln!(out, "  {:>w$.5}", ratio.value, w = ratio_head.len().max(10));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{REPORT_CSV_HEADER}")?;
        for (row, ratio) in self.rows.iter().zip(&self.ratios) {
            writeln!(
                out,
                "{},{},{}",
                row.strategy,
                significant(row.total_cost, 12),
                significant(ratio.value, 12)
            )?;
        }
        Ok(())
    }
}
