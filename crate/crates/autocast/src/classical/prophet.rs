//! Prophet-style curve fitting: piecewise-linear or logistic trend,
//! Fourier seasonality, holiday indicators, and residual-bootstrap
//! quantiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{design, least_squares};
use crate::error::{Error, Result};
use crate::forecast::{empirical_quantiles, QuantileForecast};
use crate::timeseries::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendKind {
    LinearPiecewise,
    Logistic,
}

/// One named set of event dates (epoch seconds on the series grid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolidaySet {
    pub name: String,
    pub timestamps: Vec<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProphetSpec {
    pub trend: TrendKind,
    pub n_changepoints: usize,
    /// Fourier order N; 0 disables seasonality.
    pub fourier_order: usize,
    /// Seasonal period in grid steps.
    pub period: f64,
    pub holidays: Vec<HolidaySet>,
    /// Carrying capacity, required for the logistic trend.
    pub capacity: Option<f64>,
    pub n_bootstrap: usize,
}

impl ProphetSpec {
    pub fn default_for(period: f64) -> Self {
        ProphetSpec {
            trend: TrendKind::LinearPiecewise,
            n_changepoints: 10,
            fourier_order: 3,
            period,
            holidays: Vec::new(),
            capacity: None,
            n_bootstrap: 300,
        }
    }
}

/// Logistic growth with changepoint-adjusted rate and offset. The offset
/// corrections keep the exponent's argument continuous across changepoints.
pub fn logistic_trend(
    t: f64,
    capacity: f64,
    k: f64,
    m: f64,
    changepoints: &[f64],
    deltas: &[f64],
    gammas: &[f64],
) -> f64 {
    let mut rate = k;
    let mut offset = m;
    for ((s, d), g) in changepoints.iter().zip(deltas).zip(gammas) {
        if t >= *s {
            rate += d;
            offset += g;
        }
    }
    capacity / (1.0 + (-(rate) * (t - offset)).exp())
}

/// Offset corrections for the logistic trend, one per changepoint.
fn logistic_gammas(k: f64, m: f64, changepoints: &[f64], deltas: &[f64]) -> Vec<f64> {
    let mut gammas = Vec::with_capacity(changepoints.len());
    let mut rate_before = k;
    let mut gamma_sum = 0.0;
    for (s, d) in changepoints.iter().zip(deltas) {
        let rate_after = rate_before + d;
        let gamma = if rate_after == 0.0 {
            0.0
        } else {
            (s - m - gamma_sum) * (1.0 - rate_before / rate_after)
        };
        gammas.push(gamma);
        gamma_sum += gamma;
        rate_before = rate_after;
    }
    gammas
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FittedTrend {
    /// Joint least-squares fit; `beta` covers every design column.
    Linear { beta: Vec<f64> },
    Logistic {
        capacity: f64,
        k: f64,
        m: f64,
        deltas: Vec<f64>,
        gammas: Vec<f64>,
        /// Coefficients of the seasonal/holiday regression on the trend
        /// residual (leading entry is an intercept).
        seasonal_beta: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProphetModel {
    pub trend: FittedTrend,
    pub changepoints: Vec<f64>,
    pub fourier_order: usize,
    pub period: f64,
    pub holidays: Vec<HolidaySet>,
    pub residual_pool: Vec<f64>,
    pub n_train: usize,
    pub start: i64,
    pub step: i64,
    pub n_bootstrap: usize,
}

fn holiday_indicator(h: &HolidaySet, start: i64, step: i64, t: f64) -> f64 {
    let ts = start + (t.round() as i64) * step;
    if h.timestamps.contains(&ts) {
        1.0
    } else {
        0.0
    }
}

/// Seasonal and holiday feature values at time index `t` (no trend terms).
fn seasonal_features(t: f64, order: usize, period: f64, holidays: &[HolidaySet], start: i64, step: i64) -> Vec<f64> {
    let mut f = Vec::with_capacity(2 * order + holidays.len());
    for n in 1..=order {
        let arg = 2.0 * std::f64::consts::PI * n as f64 * t / period;
        f.push(arg.cos());
        f.push(arg.sin());
    }
    for h in holidays {
        f.push(holiday_indicator(h, start, step, t));
    }
    f
}

/// Full linear design row: intercept, slope, hinge per changepoint, then
/// seasonal/holiday features. Hinge features make the trend continuous at
/// every changepoint.
fn linear_features(t: f64, changepoints: &[f64], order: usize, period: f64, holidays: &[HolidaySet], start: i64, step: i64) -> Vec<f64> {
    let mut f = vec![1.0, t];
    for s in changepoints {
        f.push((t - s).max(0.0));
    }
    f.extend(seasonal_features(t, order, period, holidays, start, step));
    f
}

impl ProphetModel {
    /// Point prediction at (possibly fractional) time index `t`.
    pub fn predict(&self, t: f64) -> f64 {
        match &self.trend {
            FittedTrend::Linear { beta } => {
                let f = linear_features(
                    t,
                    &self.changepoints,
                    self.fourier_order,
                    self.period,
                    &self.holidays,
                    self.start,
                    self.step,
                );
                f.iter().zip(beta).map(|(a, b)| a * b).sum()
            }
            FittedTrend::Logistic {
                capacity,
                k,
                m,
                deltas,
                gammas,
                seasonal_beta,
            } => {
                let g = logistic_trend(t, *capacity, *k, *m, &self.changepoints, deltas, gammas);
                let mut f = vec![1.0];
                f.extend(seasonal_features(
                    t,
                    self.fourier_order,
                    self.period,
                    &self.holidays,
                    self.start,
                    self.step,
                ));
                g + f.iter().zip(seasonal_beta).map(|(a, b)| a * b).sum::<f64>()
            }
        }
    }

    /// Trend component alone.
    pub fn trend_at(&self, t: f64) -> f64 {
        match &self.trend {
            FittedTrend::Linear { beta } => {
                let mut g = beta[0] + beta[1] * t;
                for (j, s) in self.changepoints.iter().enumerate() {
                    g += beta[2 + j] * (t - s).max(0.0);
                }
                g
            }
            FittedTrend::Logistic {
                capacity,
                k,
                m,
                deltas,
                gammas,
                ..
            } => logistic_trend(t, *capacity, *k, *m, &self.changepoints, deltas, gammas),
        }
    }
}

fn uniform_changepoints(n_train: usize, count: usize) -> Vec<f64> {
    (0..count)
        .map(|j| (j + 1) as f64 * n_train as f64 / (count + 1) as f64)
        .collect()
}

pub fn fit_prophet(train: &TimeSeries, spec: &ProphetSpec) -> Result<ProphetModel> {
    let n = train.len();
    let need = 2 * (2 * spec.fourier_order + spec.n_changepoints + 2);
    if n < need {
        return Err(Error::ItemTooShort {
            item: train.item_id.clone(),
            len: n,
            need,
        });
    }
    if spec.period <= 0.0 {
        return Err(Error::invalid("period must be positive"));
    }
    let changepoints = uniform_changepoints(n, spec.n_changepoints);
    let step = train.freq.step_seconds();
    let y = &train.values;

    let (trend, residuals) = match spec.trend {
        TrendKind::LinearPiecewise => {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|t| {
                    linear_features(
                        t as f64,
                        &changepoints,
                        spec.fourier_order,
                        spec.period,
                        &spec.holidays,
                        train.start,
                        step,
                    )
                })
                .collect();
            let ncols = rows[0].len();
            let cols: Vec<Vec<f64>> = (0..ncols)
                .map(|c| rows.iter().map(|r| r[c]).collect())
                .collect();
            let x = design(&cols);
            let yv = nalgebra::DVector::from_column_slice(y);
            let beta = least_squares(&x, &yv)?;
            let beta: Vec<f64> = beta.iter().copied().collect();
            let residuals: Vec<f64> = (0..n)
                .map(|t| y[t] - rows[t].iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            (FittedTrend::Linear { beta }, residuals)
        }
        TrendKind::Logistic => {
            let capacity = spec
                .capacity
                .ok_or_else(|| Error::invalid("logistic trend requires a capacity"))?;
            let (k, m, deltas, gammas) = fit_logistic_trend(y, capacity, &changepoints);
            // Seasonality and holidays on the trend residual.
            let detrended: Vec<f64> = (0..n)
                .map(|t| {
                    y[t] - logistic_trend(t as f64, capacity, k, m, &changepoints, &deltas, &gammas)
                })
                .collect();
            let mut cols = vec![vec![1.0; n]];
            let width = 2 * spec.fourier_order + spec.holidays.len();
            for c in 0..width {
                cols.push(
                    (0..n)
                        .map(|t| {
                            seasonal_features(
                                t as f64,
                                spec.fourier_order,
                                spec.period,
                                &spec.holidays,
                                train.start,
                                step,
                            )[c]
                        })
                        .collect(),
                );
            }
            let x = design(&cols);
            let yv = nalgebra::DVector::from_column_slice(&detrended);
            let beta = least_squares(&x, &yv)?;
            let seasonal_beta: Vec<f64> = beta.iter().copied().collect();
            let residuals: Vec<f64> = (0..n)
                .map(|t| {
                    let mut f = vec![1.0];
                    f.extend(seasonal_features(
                        t as f64,
                        spec.fourier_order,
                        spec.period,
                        &spec.holidays,
                        train.start,
                        step,
                    ));
                    detrended[t] - f.iter().zip(&seasonal_beta).map(|(a, b)| a * b).sum::<f64>()
                })
                .collect();
            (
                FittedTrend::Logistic {
                    capacity,
                    k,
                    m,
                    deltas,
                    gammas,
                    seasonal_beta,
                },
                residuals,
            )
        }
    };

    Ok(ProphetModel {
        trend,
        changepoints,
        fourier_order: spec.fourier_order,
        period: spec.period,
        holidays: spec.holidays.clone(),
        residual_pool: residuals,
        n_train: n,
        start: train.start,
        step,
        n_bootstrap: spec.n_bootstrap.max(1),
    })
}

/// Coarse grid search for the logistic growth rate and offset, followed by
/// greedy per-changepoint rate adjustments.
fn fit_logistic_trend(y: &[f64], capacity: f64, changepoints: &[f64]) -> (f64, f64, Vec<f64>, Vec<f64>) {
    let n = y.len();
    let sse = |k: f64, m: f64, deltas: &[f64]| -> f64 {
        let gammas = logistic_gammas(k, m, changepoints, deltas);
        (0..n)
            .map(|t| {
                let g = logistic_trend(t as f64, capacity, k, m, changepoints, deltas, &gammas);
                (y[t] - g) * (y[t] - g)
            })
            .sum()
    };
    let mut best = (f64::INFINITY, 0.1, n as f64 / 2.0);
    for ki in 0..17 {
        // log-spaced magnitudes in [1e-3, ~2.5], both signs
        let mag = 1e-3 * (1.6f64).powi(ki);
        for k in [mag, -mag] {
            for mi in 0..17 {
                let m = n as f64 * (mi as f64 + 0.5) / 17.0;
                let zero = vec![0.0; changepoints.len()];
                let s = sse(k, m, &zero);
                if s < best.0 {
                    best = (s, k, m);
                }
            }
        }
    }
    let (mut best_sse, k, m) = best;
    let mut deltas = vec![0.0; changepoints.len()];
    for j in 0..changepoints.len() {
        let mut best_d = 0.0;
        for frac in [-0.75, -0.5, -0.25, 0.25, 0.5, 0.75] {
            let mut trial = deltas.clone();
            trial[j] = frac * k;
            let s = sse(k, m, &trial);
            if s < best_sse {
                best_sse = s;
                best_d = trial[j];
            }
        }
        deltas[j] = best_d;
    }
    let gammas = logistic_gammas(k, m, changepoints, &deltas);
    (k, m, deltas, gammas)
}

/// Fits the curve and forecasts `horizon` steps ahead with seeded
/// residual-bootstrap quantile bands.
pub fn fit_forecast_prophet(
    train: &TimeSeries,
    spec: &ProphetSpec,
    horizon: usize,
    taus: &[f64],
    seed: u64,
) -> Result<QuantileForecast> {
    let model = fit_prophet(train, spec)?;
    forecast_prophet(&model, horizon, taus, seed, &train.item_id)
}

pub fn forecast_prophet(
    model: &ProphetModel,
    horizon: usize,
    taus: &[f64],
    seed: u64,
    item_id: &str,
) -> Result<QuantileForecast> {
    let points: Vec<f64> = (0..horizon)
        .map(|h| model.predict((model.n_train + h) as f64))
        .collect();
    let pool = &model.residual_pool;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let paths: Vec<Vec<f64>> = (0..model.n_bootstrap)
        .map(|_| {
            points
                .iter()
                .map(|p| p + pool[rng.random_range(0..pool.len())])
                .collect()
        })
        .collect();
    empirical_quantiles(item_id, &paths, taus, horizon)
}
