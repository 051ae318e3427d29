//! Quantile forecast container shared by all forecasters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::tau_key;

/// A Q x K matrix of predicted quantile values for one item: rows follow the
/// sorted quantile levels, columns the forecast horizon steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileForecast {
    pub item_id: String,
    pub taus: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl QuantileForecast {
    pub fn new(item_id: impl Into<String>, taus: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::invalid("quantile levels must be non-empty"));
        }
        if taus.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("quantile levels must be strictly increasing"));
        }
        if values.len() != taus.len() {
            return Err(Error::invalid(format!(
                "expected {} quantile rows, got {}",
                taus.len(),
                values.len()
            )));
        }
        let k = values[0].len();
        if k == 0 || values.iter().any(|row| row.len() != k) {
            return Err(Error::invalid("quantile rows must share a positive length"));
        }
        Ok(QuantileForecast {
            item_id: item_id.into(),
            taus,
            values,
        })
    }

    /// Builds a forecast where every quantile row equals the point path.
    pub fn from_point(item_id: impl Into<String>, taus: Vec<f64>, path: Vec<f64>) -> Result<Self> {
        let rows = vec![path; taus.len()];
        QuantileForecast::new(item_id, taus, rows)
    }

    pub fn horizon(&self) -> usize {
        self.values[0].len()
    }

    /// Row for quantile level `tau`, if present.
    pub fn row(&self, tau: f64) -> Option<&[f64]> {
        self.taus
            .iter()
            .position(|t| (*t - tau).abs() < 1e-9)
            .map(|i| self.values[i].as_slice())
    }

    /// The median row, or the middle row when 0.5 is not among the levels.
    pub fn median(&self) -> &[f64] {
        self.row(0.5).unwrap_or(&self.values[self.taus.len() / 2])
    }

    /// Repairs quantile crossing by sorting each horizon step's column in
    /// ascending order.
    pub fn repair_crossing(&mut self) {
        for k in 0..self.horizon() {
            let mut col: Vec<f64> = self.values.iter().map(|row| row[k]).collect();
            col.sort_by(|a, b| a.partial_cmp(b).expect("finite quantiles"));
            for (row, v) in self.values.iter_mut().zip(col) {
                row[k] = v;
            }
        }
    }

    /// True when every column is non-decreasing in tau.
    pub fn is_monotone(&self) -> bool {
        (0..self.horizon()).all(|k| {
            self.values
                .windows(2)
                .all(|rows| rows[0][k] <= rows[1][k] + 1e-12)
        })
    }

    /// Per-tau view keyed by the canonical tau string, as consumed by
    /// `metrics::eval_avg_wql`.
    pub fn by_tau(&self) -> BTreeMap<String, Vec<f64>> {
        self.taus
            .iter()
            .zip(&self.values)
            .map(|(t, row)| (tau_key(*t), row.clone()))
            .collect()
    }

    /// Element-wise mean of several forecasts for the same item, with
    /// crossing repaired afterwards.
    pub fn mean_of(forecasts: &[&QuantileForecast]) -> Result<QuantileForecast> {
        let first = forecasts
            .first()
            .ok_or_else(|| Error::invalid("cannot average zero forecasts"))?;
        for f in forecasts {
            if f.taus != first.taus || f.horizon() != first.horizon() {
                return Err(Error::invalid(
                    "forecasts to average must share quantile levels and horizon",
                ));
            }
        }
        let q = first.taus.len();
        let k = first.horizon();
        let mut values = vec![vec![0.0; k]; q];
        for f in forecasts {
            for (acc, row) in values.iter_mut().zip(&f.values) {
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += v;
                }
            }
        }
        let n = forecasts.len() as f64;
        for row in &mut values {
            for v in row.iter_mut() {
                *v /= n;
            }
        }
        let mut out = QuantileForecast::new(first.item_id.clone(), first.taus.clone(), values)?;
        out.repair_crossing();
        Ok(out)
    }
}

/// Per-step empirical quantiles of a set of sample paths (rows = samples).
/// Uses linear interpolation between order statistics.
pub fn empirical_quantiles(
    item_id: &str,
    paths: &[Vec<f64>],
    taus: &[f64],
    horizon: usize,
) -> Result<QuantileForecast> {
    if paths.is_empty() {
        return Err(Error::invalid("no sample paths"));
    }
    let mut values = vec![vec![0.0; horizon]; taus.len()];
    let mut col = vec![0.0; paths.len()];
    for k in 0..horizon {
        for (s, p) in paths.iter().enumerate() {
            col[s] = p[k];
        }
        col.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        for (qi, tau) in taus.iter().enumerate() {
            values[qi][k] = quantile_sorted(&col, *tau);
        }
    }
    let mut qf = QuantileForecast::new(item_id, taus.to_vec(), values)?;
    qf.repair_crossing();
    Ok(qf)
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], tau: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = tau * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
