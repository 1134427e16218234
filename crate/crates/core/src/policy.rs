//! Unit-price policy tables and their CSV form.
//!
//! CSV schema: header `k,r,u_opt,j_value`, one row per `(k, r)` in time-major
//! order, `j_value` written with 12 significant digits.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::fmt::significant;
use crate::types::{AllocationVector, CostSpec, MarketParams, TimeGrid};

pub const CSV_HEADER: &str = "k,r,u_opt,j_value";

/// The inputs a table was solved for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fingerprint {
    pub grid: TimeGrid,
    pub params: MarketParams,
    pub spec: CostSpec,
}

/// Optimal actions `U[k][r]` and unit-price costs-to-go `J[k][r]` for
/// `k = 0..=N`, `r = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    n_steps: usize,
    capacity: usize,
    actions: Vec<usize>,
    values: Vec<f64>,
    fingerprint: Option<Fingerprint>,
}

impl PolicyTable {
    pub(crate) fn from_layers(
        n_steps: usize,
        capacity: usize,
        actions: Vec<usize>,
        values: Vec<f64>,
        fingerprint: Option<Fingerprint>,
    ) -> Self {
        debug_assert_eq!(actions.len(), (n_steps + 1) * (capacity + 1));
        debug_assert_eq!(values.len(), actions.len());
        Self {
            n_steps,
            capacity,
            actions,
            values,
            fingerprint,
        }
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Largest position the table covers.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn fingerprint(&self) -> Option<&Fingerprint> {
        self.fingerprint.as_ref()
    }

    /// True when the table was solved under the fiscal cost, where any single
    /// purchase time is equally optimal.
    pub fn is_fiscal(&self) -> bool {
        self.fingerprint.is_some_and(|f| f.spec.is_fiscal())
    }

    fn idx(&self, k: usize, r: usize) -> usize {
        assert!(
            k <= self.n_steps && r <= self.capacity,
            "({k}, {r}) outside table"
        );
        k * (self.capacity + 1) + r
    }

    pub fn action(&self, k: usize, r: usize) -> usize {
        self.actions[self.idx(k, r)]
    }

    pub fn value(&self, k: usize, r: usize) -> f64 {
        self.values[self.idx(k, r)]
    }

    pub fn action_layer(&self, k: usize) -> &[usize] {
        let start = self.idx(k, 0);
        &self.actions[start..start + self.capacity + 1]
    }

    pub fn value_layer(&self, k: usize) -> &[f64] {
        let start = self.idx(k, 0);
        &self.values[start..start + self.capacity + 1]
    }

    /// Follows the table from `R_0 = k_shares`: `u_k = U[k][R_k]`.
    /// Prices never enter, since the optimal action does not depend on them.
    pub fn rollout(&self, k_shares: usize) -> Result<AllocationVector> {
        if k_shares > self.capacity {
            return Err(Error::IndexOutOfRange {
                index: k_shares,
                max: self.capacity,
            });
        }
        let mut remaining = k_shares;
        let purchases = (0..=self.n_steps)
            .map(|k| {
                let u = self.action(k, remaining);
                remaining -= u;
                u
            })
            .collect();
        Ok(AllocationVector::new(purchases))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for k in 0..=self.n_steps {
            for r in 0..=self.capacity {
                writeln!(
                    out,
                    "{k},{r},{},{}",
                    self.action(k, r),
                    significant(self.value(k, r), 12)
                )?;
            }
        }
        Ok(())
    }

    /// Reads a table written by [`PolicyTable::write_csv`]. Rows must form a
    /// complete `(N + 1) x (K + 1)` grid in time-major order, and the last
    /// layer must buy everything left.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let headers = reader.headers().map_err(|e| parse_err(1, e))?.clone();
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        if names != ["k", "r", "u_opt", "j_value"] {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header `{CSV_HEADER}`, found `{}`",
                    names.join(",")
                ),
            });
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e))?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != 4 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 4 fields, found {}", rec.len()),
                });
            }
            let int = |i: usize| -> Result<usize> {
                rec[i].trim().parse().map_err(|e| Error::Parse {
                    line,
                    message: format!("field {i}: {e}"),
                })
            };
            let value: f64 = rec[3].trim().parse().map_err(|e| Error::Parse {
                line,
                message: format!("j_value: {e}"),
            })?;
            rows.push((int(0)?, int(1)?, int(2)?, value, line));
        }
        let Some(&(n_steps, capacity, ..)) = rows.last() else {
            return Err(Error::Data("policy table has no rows".into()));
        };
        if rows.len() != (n_steps + 1) * (capacity + 1) {
            return Err(Error::Data(format!(
                "expected {} rows for N = {n_steps}, K = {capacity}, found {}",
                (n_steps + 1) * (capacity + 1),
                rows.len()
            )));
        }
        let mut actions = Vec::with_capacity(rows.len());
        let mut values = Vec::with_capacity(rows.len());
        for (i, (k, r, u, j, line)) in rows.into_iter().enumerate() {
            if (k, r) != (i / (capacity + 1), i % (capacity + 1)) {
                return Err(Error::Parse {
                    line,
                    message: format!("row ({k}, {r}) out of order"),
                });
            }
            if u > r {
                return Err(Error::Parse {
                    line,
                    message: format!("action {u} exceeds position {r}"),
                });
            }
            if k == n_steps && u != r {
                return Err(Error::Parse {
                    line,
                    message: format!("terminal action must buy the remaining {r}, found {u}"),
                });
            }
            actions.push(u);
            values.push(j);
        }
        Ok(Self::from_layers(n_steps, capacity, actions, values, None))
    }
}

fn parse_err(line: u64, e: csv::Error) -> Error {
    Error::Parse {
        line,
        message: e.to_string(),
    }
}
