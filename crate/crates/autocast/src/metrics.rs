//! Forecast evaluation metrics, Pearson correlation and metric
//! representativity.
//!
//! All operations are pure. Metrics for a dataset are computed per item and
//! averaged unweighted.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The seven headline metrics of a backtest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mape: f64,
    pub mase: f64,
    pub wape: f64,
    pub wql_10: f64,
    pub wql_50: f64,
    pub wql_90: f64,
    pub avg_wql: f64,
}

impl MetricReport {
    pub const CSV_HEADER: &'static str = "mape,mase,wape,wql_10,wql_50,wql_90,avg_wql";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.mape, self.mase, self.wape, self.wql_10, self.wql_50, self.wql_90, self.avg_wql
        )
    }
}

fn check_equal_len(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.is_empty() {
        return Err(Error::invalid("empty series"));
    }
    if actual.len() != predicted.len() {
        return Err(Error::invalid(format!(
            "length mismatch: actual {} vs predicted {}",
            actual.len(),
            predicted.len()
        )));
    }
    Ok(())
}

/// Mean absolute percentage error. Errors if any actual value is zero,
/// since the ratio is undefined there.
pub fn eval_mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_equal_len(actual, predicted)?;
    let mut sum = 0.0;
    for (i, (z, zh)) in actual.iter().zip(predicted).enumerate() {
        if *z == 0.0 {
            return Err(Error::ZeroActual(i));
        }
        sum += ((z - zh) / z).abs();
    }
    Ok(sum / actual.len() as f64)
}

/// Mean absolute scaled error. The scale is the mean absolute seasonal
/// difference over the training series with period `m`.
pub fn eval_mase(actual: &[f64], predicted: &[f64], train: &[f64], m: usize) -> Result<f64> {
    check_equal_len(actual, predicted)?;
    if m == 0 {
        return Err(Error::invalid("seasonality m must be >= 1"));
    }
    let d = train.len();
    if d <= m {
        return Err(Error::invalid(format!(
            "training series length {d} must exceed seasonality {m}"
        )));
    }
    let scale: f64 = (m..d).map(|j| (train[j] - train[j - m]).abs()).sum::<f64>() / (d - m) as f64;
    if scale == 0.0 {
        return Err(Error::ZeroVariance(format!(
            "seasonal naive error over training series (m = {m})"
        )));
    }
    let mae: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(z, zh)| (z - zh).abs())
        .sum::<f64>()
        / actual.len() as f64;
    Ok(mae / scale)
}

/// Weighted absolute percentage error.
pub fn eval_wape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_equal_len(actual, predicted)?;
    let denom: f64 = actual.iter().map(|z| z.abs()).sum();
    if denom == 0.0 {
        return Err(Error::ZeroVariance("sum of |actual| is zero".into()));
    }
    let num: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(z, zh)| (z - zh).abs())
        .sum();
    Ok(num / denom)
}

/// Weighted quantile loss at level `tau`. At `tau = 0.5` this equals the
/// WAPE of the same inputs.
pub fn eval_wql(actual: &[f64], quantile_pred: &[f64], tau: f64) -> Result<f64> {
    check_equal_len(actual, quantile_pred)?;
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid(format!("tau {tau} must lie in (0, 1)")));
    }
    let denom: f64 = actual.iter().map(|z| z.abs()).sum();
    if denom == 0.0 {
        return Err(Error::ZeroVariance("sum of |actual| is zero".into()));
    }
    let num: f64 = actual
        .iter()
        .zip(quantile_pred)
        .map(|(z, q)| tau * (z - q).max(0.0) + (1.0 - tau) * (q - z).max(0.0))
        .sum();
    Ok(2.0 * num / denom)
}

/// Mean of `eval_wql` over a quantile set.
pub fn eval_avg_wql(
    actual: &[f64],
    quantile_preds: &BTreeMap<String, Vec<f64>>,
    taus: &[f64],
) -> Result<f64> {
    if taus.is_empty() {
        return Err(Error::invalid("quantile set must be non-empty"));
    }
    let mut sum = 0.0;
    for tau in taus {
        let key = tau_key(*tau);
        let pred = quantile_preds
            .get(&key)
            .ok_or_else(|| Error::invalid(format!("missing predictions for tau {tau}")))?;
        sum += eval_wql(actual, pred, *tau)?;
    }
    Ok(sum / taus.len() as f64)
}

/// Canonical string key for a quantile level, used wherever per-tau series
/// are keyed in maps or files.
pub fn tau_key(tau: f64) -> String {
    format!("{tau:.3}")
}

/// Pairwise Pearson correlations between named observation vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub rho: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn from_parts(labels: Vec<String>, rho: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if rho.len() != n || rho.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("correlation matrix shape mismatch"));
        }
        Ok(CorrelationMatrix { labels, rho })
    }
}

/// Computes the Pearson correlation matrix over per-metric value vectors.
/// All vectors must have the same length (>= 2) and nonzero variance.
pub fn pearson_matrix(observations: &[(String, Vec<f64>)]) -> Result<CorrelationMatrix> {
    if observations.is_empty() {
        return Err(Error::invalid("no observation vectors"));
    }
    let n = observations[0].1.len();
    if n < 2 {
        return Err(Error::invalid("need at least 2 observations per metric"));
    }
    for (label, v) in observations {
        if v.len() != n {
            return Err(Error::invalid(format!(
                "observation vector `{label}` has length {}, expected {n}",
                v.len()
            )));
        }
    }
    let means: Vec<f64> = observations
        .iter()
        .map(|(_, v)| v.iter().sum::<f64>() / n as f64)
        .collect();
    let stds: Vec<f64> = observations
        .iter()
        .zip(&means)
        .map(|((label, v), mu)| {
            let var = v.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n as f64;
            if var == 0.0 {
                Err(Error::ZeroVariance(label.clone()))
            } else {
                Ok(var.sqrt())
            }
        })
        .collect::<Result<_>>()?;
    let k = observations.len();
    let mut rho = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let cov = observations[i]
                .1
                .iter()
                .zip(&observations[j].1)
                .map(|(a, b)| (a - means[i]) * (b - means[j]))
                .sum::<f64>()
                / n as f64;
            let r = cov / (stds[i] * stds[j]);
            rho[i][j] = r;
            rho[j][i] = r;
        }
    }
    CorrelationMatrix::from_parts(
        observations.iter().map(|(l, _)| l.clone()).collect(),
        rho,
    )
}

/// Per-column arithmetic mean of the correlation matrix, diagonal included.
/// High values mark metrics that move with all the others.
pub fn representativity(c: &CorrelationMatrix) -> BTreeMap<String, f64> {
    let n = c.labels.len();
    let mut out = BTreeMap::new();
    for (j, label) in c.labels.iter().enumerate() {
        let mean = (0..n).map(|i| c.rho[i][j]).sum::<f64>() / n as f64;
        out.insert(label.clone(), mean);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn mape_hand_cases() {
        assert_eq!(eval_mape(&[2.0, 4.0], &[2.0, 4.0]).unwrap(), 0.0);
        let v = eval_mape(&[2.0, 4.0], &[1.0, 5.0]).unwrap();
        assert!((v - 0.375).abs() < 1e-15);
        assert!(matches!(
            eval_mape(&[2.0, 0.0], &[1.0, 1.0]),
            Err(Error::ZeroActual(1))
        ));
    }

    #[test]
    fn mase_hand_cases() {
        assert_eq!(eval_mase(&[4.0], &[4.0], &[1.0, 2.0, 3.0], 1).unwrap(), 0.0);
        let v = eval_mase(&[4.0], &[2.0], &[1.0, 2.0, 3.0], 1).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
        assert!(eval_mase(&[1.0], &[0.5], &[5.0, 5.0, 5.0], 1).is_err());
    }

    #[test]
    fn wape_hand_cases() {
        assert_eq!(eval_wape(&[1.0, 3.0], &[1.0, 3.0]).unwrap(), 0.0);
        let v = eval_wape(&[1.0, 3.0], &[2.0, 2.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!(eval_wape(&[0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn wql_hand_cases() {
        assert_eq!(eval_wql(&[10.0], &[10.0], 0.3).unwrap(), 0.0);
        let v = eval_wql(&[10.0], &[8.0], 0.9).unwrap();
        assert!((v - 0.36).abs() < 1e-15);
        assert!(eval_wql(&[10.0], &[8.0], 1.0).is_err());
        assert!(eval_wql(&[10.0], &[8.0], 0.0).is_err());
    }

    #[test]
    fn wql_half_equals_wape_on_random_series() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = rng.random_range(1..20);
            let actual: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..100.0)).collect();
            let pred: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..150.0)).collect();
            let wql = eval_wql(&actual, &pred, 0.5).unwrap();
            let wape = eval_wape(&actual, &pred).unwrap();
            assert!((wql - wape).abs() <= 1e-12, "wql {wql} wape {wape}");
        }
    }

    #[test]
    fn scale_invariance_at_c7() {
        let actual = vec![3.0, 5.0, 2.0, 8.0];
        let pred = vec![2.5, 6.0, 2.2, 7.0];
        let c = 7.0;
        let actual_c: Vec<f64> = actual.iter().map(|v| v * c).collect();
        let pred_c: Vec<f64> = pred.iter().map(|v| v * c).collect();
        for (a, b) in [
            (eval_mape(&actual, &pred), eval_mape(&actual_c, &pred_c)),
            (eval_wape(&actual, &pred), eval_wape(&actual_c, &pred_c)),
            (
                eval_wql(&actual, &pred, 0.9),
                eval_wql(&actual_c, &pred_c, 0.9),
            ),
        ] {
            assert!((a.unwrap() - b.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn wql_monotone_in_miscalibration() {
        let actual = vec![10.0, 12.0];
        for tau in [0.1, 0.5, 0.9] {
            let base = eval_wql(&actual, &[11.0, 12.0], tau).unwrap();
            let worse = eval_wql(&actual, &[13.0, 12.0], tau).unwrap();
            assert!(worse > base, "tau {tau}: {worse} <= {base}");
        }
    }

    #[test]
    fn avg_wql_is_mean_over_taus() {
        let actual = vec![10.0, 20.0];
        let mut preds = BTreeMap::new();
        preds.insert(tau_key(0.1), vec![9.0, 19.0]);
        preds.insert(tau_key(0.5), vec![10.0, 20.0]);
        preds.insert(tau_key(0.9), vec![11.0, 21.0]);
        let taus = [0.1, 0.5, 0.9];
        let per_tau: Vec<f64> = taus
            .iter()
            .map(|t| eval_wql(&actual, &preds[&tau_key(*t)], *t).unwrap())
            .collect();
        let mean = per_tau.iter().sum::<f64>() / 3.0;
        let avg = eval_avg_wql(&actual, &preds, &taus).unwrap();
        assert!((avg - mean).abs() < 1e-15);

        // Single tau reduces to that tau's wQL.
        let single = eval_avg_wql(&actual, &preds, &[0.9]).unwrap();
        assert!((single - per_tau[2]).abs() < 1e-15);

        assert!(eval_avg_wql(&actual, &preds, &[]).is_err());
    }

    #[test]
    fn avg_wql_perfect_forecasts() {
        let actual = vec![4.0, 5.0];
        let mut preds = BTreeMap::new();
        for tau in [0.1, 0.5, 0.9] {
            preds.insert(tau_key(tau), actual.clone());
        }
        assert_eq!(eval_avg_wql(&actual, &preds, &[0.1, 0.5, 0.9]).unwrap(), 0.0);
    }

    #[test]
    fn pearson_perfect_linear() {
        let obs = vec![
            ("x".to_string(), vec![1.0, 2.0, 3.0]),
            ("y".to_string(), vec![2.0, 4.0, 6.0]),
            ("z".to_string(), vec![6.0, 4.0, 2.0]),
        ];
        let m = pearson_matrix(&obs).unwrap();
        assert!((m.rho[0][0] - 1.0).abs() < 1e-12);
        assert!((m.rho[0][1] - 1.0).abs() < 1e-12);
        assert!((m.rho[0][2] + 1.0).abs() < 1e-12);
        // Symmetry and unit diagonal.
        for i in 0..3 {
            assert!((m.rho[i][i] - 1.0).abs() < 1e-12);
            for j in 0..3 {
                assert!((m.rho[i][j] - m.rho[j][i]).abs() < 1e-12);
                assert!(m.rho[i][j].abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn pearson_zero_variance_named() {
        let obs = vec![
            ("x".to_string(), vec![1.0, 2.0, 3.0]),
            ("flat".to_string(), vec![5.0, 5.0, 5.0]),
        ];
        match pearson_matrix(&obs).unwrap_err() {
            Error::ZeroVariance(name) => assert_eq!(name, "flat"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn representativity_identity_two_by_two() {
        let m = CorrelationMatrix::from_parts(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let r = representativity(&m);
        assert_eq!(r["a"], 0.5);
        assert_eq!(r["b"], 0.5);
    }
}
