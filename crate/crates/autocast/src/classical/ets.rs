//! Simple exponential smoothing with the weight chosen by a one-step SSE
//! grid search.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::forecast::QuantileForecast;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtsModel {
    pub theta: f64,
    pub last_smoothed: f64,
    pub sigma: f64,
}

fn one_step_sse(train: &[f64], theta: f64) -> (f64, f64, f64) {
    // Prediction for z_1 is z_0; the smoothed state updates after each
    // observation.
    let mut s = train[0];
    let mut sse = 0.0;
    for &z in &train[1..] {
        let err = z - s;
        sse += err * err;
        s += theta * err;
    }
    let sigma = (sse / (train.len() - 1) as f64).sqrt();
    (sse, s, sigma)
}

/// Fits the smoothing weight on the grid {0, 0.05, ..., 1}. `forced_theta`
/// skips the search.
pub fn fit_ets(train: &[f64], forced_theta: Option<f64>) -> Result<EtsModel> {
    if train.len() < 2 {
        return Err(Error::invalid("ETS needs at least 2 observations"));
    }
    if let Some(theta) = forced_theta {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::invalid(format!("theta {theta} must lie in [0, 1]")));
        }
        let (_, s, sigma) = one_step_sse(train, theta);
        return Ok(EtsModel {
            theta,
            last_smoothed: s,
            sigma,
        });
    }
    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0);
    for i in 0..=20 {
        let theta = i as f64 * 0.05;
        let (sse, s, sigma) = one_step_sse(train, theta);
        if sse < best.0 {
            best = (sse, theta, s, sigma);
        }
    }
    Ok(EtsModel {
        theta: best.1,
        last_smoothed: best.2,
        sigma: best.3,
    })
}

/// Flat point forecast at the last smoothed value with Gaussian residual
/// quantile bands.
pub fn forecast_ets(model: &EtsModel, horizon: usize, taus: &[f64], item_id: &str) -> Result<QuantileForecast> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let values: Vec<Vec<f64>> = taus
        .iter()
        .map(|tau| {
            let z = if (*tau - 0.5).abs() < 1e-12 {
                0.0
            } else {
                normal.inverse_cdf(*tau)
            };
            vec![model.last_smoothed + z * model.sigma; horizon]
        })
        .collect();
    let mut qf = QuantileForecast::new(item_id, taus.to_vec(), values)?;
    qf.repair_crossing();
    Ok(qf)
}

pub fn fit_forecast_ets(train: &[f64], horizon: usize, taus: &[f64], item_id: &str) -> Result<QuantileForecast> {
    let model = fit_ets(train, None)?;
    forecast_ets(&model, horizon, taus, item_id)
}
