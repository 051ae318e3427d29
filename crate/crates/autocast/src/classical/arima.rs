//! ARIMA: integration transform, PACF, Hannan-Rissanen coefficient
//! estimation and Gaussian-interval quantile forecasts.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::linalg::{design, least_squares};
use crate::error::{Error, Result};
use crate::forecast::QuantileForecast;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaSpec {
    pub fn new(p: usize, d: usize, q: usize) -> Result<Self> {
        if p + q == 0 {
            return Err(Error::invalid("ARIMA needs p + q >= 1"));
        }
        if d > 2 {
            return Err(Error::invalid("differencing order d must be <= 2"));
        }
        Ok(ArimaSpec { p, d, q })
    }
}

impl Default for ArimaSpec {
    /// ARIMA(2,1,1), the default used when no tuning is requested.
    fn default() -> Self {
        ArimaSpec { p: 2, d: 1, q: 1 }
    }
}

/// `d`-fold first differences; output length shrinks by `d`.
pub fn difference(series: &[f64], d: usize) -> Result<Vec<f64>> {
    if series.len() <= d {
        return Err(Error::invalid(format!(
            "series of length {} cannot be differenced {d} times",
            series.len()
        )));
    }
    let mut out = series.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// Inverts the integration transform for a forecast continuation. `heads`
/// holds the `d` original values immediately preceding the segment encoded
/// in `diffed`; the output has the same length as `diffed`.
pub fn inverse_difference(diffed: &[f64], heads: &[f64]) -> Result<Vec<f64>> {
    let d = heads.len();
    if d == 0 {
        return Ok(diffed.to_vec());
    }
    // lasts[j] = trailing value of the j-times differenced series.
    let mut lasts = vec![0.0; d];
    let mut level = heads.to_vec();
    lasts[0] = *level.last().unwrap();
    for slot in lasts.iter_mut().skip(1) {
        level = level.windows(2).map(|w| w[1] - w[0]).collect();
        if level.is_empty() {
            return Err(Error::invalid(format!(
                "head of length {d} is inconsistent with differencing order"
            )));
        }
        *slot = *level.last().unwrap();
    }
    let mut out = Vec::with_capacity(diffed.len());
    for &w in diffed {
        let mut acc = w;
        for j in (0..d).rev() {
            acc += lasts[j];
            lasts[j] = acc;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Partial autocorrelations at lags `1..=max_lag` via the Levinson-Durbin
/// recursion on sample autocovariances.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n <= max_lag + 1 {
        return Err(Error::invalid(format!(
            "series of length {n} too short for pacf at lag {max_lag}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let autocov = |k: usize| -> f64 {
        (k..n)
            .map(|t| (series[t] - mean) * (series[t - k] - mean))
            .sum::<f64>()
            / n as f64
    };
    let g0 = autocov(0);
    if g0 == 0.0 {
        return Err(Error::ZeroVariance("series for pacf".into()));
    }
    let gamma: Vec<f64> = (0..=max_lag).map(autocov).collect();
    let mut pacf = Vec::with_capacity(max_lag);
    let mut phi_prev = vec![0.0; max_lag + 1];
    let mut v = g0;
    for k in 1..=max_lag {
        let num = gamma[k]
            - (1..k)
                .map(|j| phi_prev[j] * gamma[k - j])
                .sum::<f64>();
        let phi_kk = num / v;
        let mut phi_new = phi_prev.clone();
        phi_new[k] = phi_kk;
        for j in 1..k {
            phi_new[j] = phi_prev[j] - phi_kk * phi_prev[k - j];
        }
        v *= 1.0 - phi_kk * phi_kk;
        pacf.push(phi_kk);
        phi_prev = phi_new;
    }
    Ok(pacf)
}

/// A fitted ARIMA model: ARMA coefficients on the differenced scale plus
/// the trailing state needed to forecast and to invert the transform.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArimaModel {
    pub spec: ArimaSpec,
    pub intercept: f64,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub sigma: f64,
    /// Last `d` original values, most recent last.
    pub heads: Vec<f64>,
    /// Last `p` differenced values, most recent last.
    pub recent_w: Vec<f64>,
    /// Last `q` innovations, most recent last.
    pub recent_eps: Vec<f64>,
}

/// Hannan-Rissanen estimation: a long autoregression supplies innovation
/// estimates, then the ARMA coefficients come from a single least-squares
/// pass on lagged values and lagged innovations.
pub fn fit_arima(train: &[f64], spec: ArimaSpec) -> Result<ArimaModel> {
    let ArimaSpec { p, d, q } = spec;
    let w = difference(train, d)?;
    let n = w.len();
    if n < 10 * (p + q) {
        return Err(Error::invalid(format!(
            "differenced length {n} below 10 * (p + q) = {}",
            10 * (p + q)
        )));
    }

    // Stage 1: long AR for innovation estimates.
    let long = ((10.0 * (n as f64).log10()).ceil() as usize)
        .max(p + q)
        .min(n / 4)
        .max(1);
    let mut eps = vec![0.0; n];
    if q > 0 {
        let rows = n - long;
        let mut cols = vec![vec![1.0; rows]];
        for lag in 1..=long {
            cols.push((long..n).map(|t| w[t - lag]).collect());
        }
        let x = design(&cols);
        let y = DVector::from_iterator(rows, (long..n).map(|t| w[t]));
        let beta = least_squares(&x, &y)?;
        for t in long..n {
            let mut pred = beta[0];
            for lag in 1..=long {
                pred += beta[lag] * w[t - lag];
            }
            eps[t] = w[t] - pred;
        }
    }

    // Stage 2: regress w_t on its own lags and lagged innovations.
    let start = if q > 0 { (long + q).max(p) } else { p };
    let rows = n.checked_sub(start).unwrap_or(0);
    if rows < p + q + 2 {
        return Err(Error::invalid(format!(
            "only {rows} usable rows for ARMA({p},{q}) regression"
        )));
    }
    let mut cols = vec![vec![1.0; rows]];
    for lag in 1..=p {
        cols.push((start..n).map(|t| w[t - lag]).collect());
    }
    for lag in 1..=q {
        cols.push((start..n).map(|t| eps[t - lag]).collect());
    }
    let x = design(&cols);
    let y = DVector::from_iterator(rows, (start..n).map(|t| w[t]));
    let beta = least_squares(&x, &y)?;

    let intercept = beta[0];
    let ar: Vec<f64> = (0..p).map(|i| beta[1 + i]).collect();
    let ma: Vec<f64> = (0..q).map(|j| beta[1 + p + j]).collect();

    // Final innovations under the fitted coefficients.
    let mut eps_fit = vec![0.0; n];
    let warm = p.max(q);
    for t in warm..n {
        let mut pred = intercept;
        for (i, phi) in ar.iter().enumerate() {
            pred += phi * w[t - 1 - i];
        }
        for (j, th) in ma.iter().enumerate() {
            pred += th * eps_fit[t - 1 - j];
        }
        eps_fit[t] = w[t] - pred;
    }
    let used = n - warm;
    let sigma = if used > p + q + 1 {
        let ssr: f64 = eps_fit[warm..].iter().map(|e| e * e).sum();
        (ssr / (used - p - q - 1) as f64).sqrt()
    } else {
        0.0
    };

    let heads = train[train.len() - d..].to_vec();
    let recent_w = w[n - p..].to_vec();
    let recent_eps = eps_fit[n - q..].to_vec();
    Ok(ArimaModel {
        spec,
        intercept,
        ar,
        ma,
        sigma,
        heads,
        recent_w,
        recent_eps,
    })
}

/// Psi weights of the ARIMA process viewed as an ARMA(p + d, q) whose AR
/// polynomial absorbs the differencing operator. The accumulated squares
/// give the forecast error variance on the original scale.
fn psi_weights(model: &ArimaModel, horizon: usize) -> Vec<f64> {
    // AR polynomial coefficients a_i in w_t = sum a_i w_{t-i}; multiplying by
    // (1 - B) per differencing order.
    let mut a = model.ar.clone();
    for _ in 0..model.spec.d {
        let mut b = vec![0.0; a.len() + 1];
        for (i, slot) in b.iter_mut().enumerate() {
            let cur = if i < a.len() { a[i] } else { 0.0 };
            let prev = if i == 0 { -1.0 } else { a[i - 1] };
            *slot = cur - prev;
        }
        a = b;
    }
    let mut psi = vec![0.0; horizon];
    for j in 1..=horizon {
        let mut val = if j <= model.ma.len() {
            model.ma[j - 1]
        } else {
            0.0
        };
        for (i, ai) in a.iter().enumerate() {
            let lag = i + 1;
            // psi_{j-lag} with psi_0 = 1 and psi_{<0} = 0.
            let p_jl = if j >= lag {
                if j - lag == 0 {
                    1.0
                } else {
                    psi[j - lag - 1]
                }
            } else {
                0.0
            };
            val += ai * p_jl;
        }
        psi[j - 1] = val;
    }
    // psi[h-1] corresponds to psi_h; the caller prepends psi_0 = 1.
    psi
}

/// Iterated one-step forecasts on the differenced scale, inverted back to
/// the original scale, with symmetric Gaussian quantile bands.
pub fn forecast_arima(model: &ArimaModel, horizon: usize, taus: &[f64], item_id: &str) -> Result<QuantileForecast> {
    let p = model.spec.p;
    let q = model.spec.q;
    // Future path on the differenced scale; innovations are zero forward.
    let mut w_future = Vec::with_capacity(horizon);
    for h in 0..horizon {
        let mut pred = model.intercept;
        for (i, phi) in model.ar.iter().enumerate() {
            let lag = i + 1;
            let val = if h >= lag {
                w_future[h - lag]
            } else {
                // reach back into observed differenced values
                let back = lag - h;
                if back <= model.recent_w.len() {
                    model.recent_w[p - back]
                } else {
                    0.0
                }
            };
            pred += phi * val;
        }
        for (j, th) in model.ma.iter().enumerate() {
            let lag = j + 1;
            if h < lag {
                let back = lag - h;
                if back <= model.recent_eps.len() {
                    pred += th * model.recent_eps[q - back];
                }
            }
        }
        w_future.push(pred);
    }
    let point = inverse_difference(&w_future, &model.heads)?;

    // Accumulated variance via psi weights (psi_0 = 1).
    let psi_tail = psi_weights(model, horizon.saturating_sub(1));
    let mut acc = 0.0;
    let mut std = Vec::with_capacity(horizon);
    for h in 0..horizon {
        let psi_h = if h == 0 { 1.0 } else { psi_tail[h - 1] };
        acc += psi_h * psi_h;
        std.push(model.sigma * acc.sqrt());
    }

    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let values: Vec<Vec<f64>> = taus
        .iter()
        .map(|tau| {
            let z = if (*tau - 0.5).abs() < 1e-12 {
                0.0
            } else {
                normal.inverse_cdf(*tau)
            };
            point
                .iter()
                .zip(&std)
                .map(|(m, s)| m + z * s)
                .collect()
        })
        .collect();
    let mut qf = QuantileForecast::new(item_id, taus.to_vec(), values)?;
    qf.repair_crossing();
    Ok(qf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn simulate_ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut z = vec![0.0f64];
        for _ in 1..n {
            let e: f64 = StandardNormal.sample(&mut rng);
            let prev = *z.last().unwrap();
            z.push(phi * prev + e);
        }
        z
    }

    fn simulate_ma1(theta: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut prev_e: f64 = StandardNormal.sample(&mut rng);
        let mut z = Vec::with_capacity(n);
        for _ in 0..n {
            let e: f64 = StandardNormal.sample(&mut rng);
            z.push(e + theta * prev_e);
            prev_e = e;
        }
        z
    }

    #[test]
    fn difference_hand_cases() {
        assert_eq!(difference(&[1.0, 2.0, 3.0, 4.0], 1).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(difference(&[5.0, 7.0], 0).unwrap(), vec![5.0, 7.0]);
        assert_eq!(difference(&[1.0, 4.0, 9.0, 16.0], 2).unwrap(), vec![2.0, 2.0]);
        assert!(difference(&[1.0], 1).is_err());
    }

    #[test]
    fn inverse_difference_hand_cases() {
        assert_eq!(
            inverse_difference(&[1.0, 1.0], &[10.0]).unwrap(),
            vec![11.0, 12.0]
        );
        assert_eq!(inverse_difference(&[3.0, 4.0], &[]).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn difference_round_trip() {
        let x = vec![5.0, 7.0, 2.0, 8.0, -3.0, 0.5];
        for d in 0..=2usize {
            let diffed = difference(&x, d).unwrap();
            let restored = inverse_difference(&diffed, &x[..d]).unwrap();
            let mut full = x[..d].to_vec();
            full.extend(restored);
            assert_eq!(full, x, "round trip failed at d = {d}");
        }
    }

    #[test]
    fn difference_round_trip_random_integers() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.random_range(4..30);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-20..20) as f64).collect();
            for d in 0..=2usize {
                let diffed = difference(&x, d).unwrap();
                let restored = inverse_difference(&diffed, &x[..d]).unwrap();
                let mut full = x[..d].to_vec();
                full.extend(restored);
                assert_eq!(full, x);
            }
        }
    }

    #[test]
    fn pacf_of_white_noise_within_band() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let n = 2000;
        let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let p = pacf(&z, 5).unwrap();
        let band = 2.0 / (n as f64).sqrt();
        for (lag, v) in p.iter().enumerate() {
            assert!(v.abs() < band, "pacf lag {} = {v} outside ±{band}", lag + 1);
        }
    }

    #[test]
    fn pacf_of_ar1() {
        let z = simulate_ar1(0.8, 2000, 3);
        let p = pacf(&z, 3).unwrap();
        assert!((p[0] - 0.8).abs() < 0.05, "pacf[1] = {}", p[0]);
        assert!(p[1].abs() < 0.05, "pacf[2] = {}", p[1]);
    }

    #[test]
    fn pacf_constant_errors() {
        assert!(pacf(&[3.0, 3.0, 3.0, 3.0, 3.0], 2).is_err());
    }

    #[test]
    fn fit_recovers_ar1() {
        let z = simulate_ar1(0.8, 2000, 7);
        let m = fit_arima(&z, ArimaSpec::new(1, 0, 0).unwrap()).unwrap();
        assert!(
            (0.75..=0.85).contains(&m.ar[0]),
            "estimated phi = {}",
            m.ar[0]
        );
    }

    #[test]
    fn fit_recovers_ma1() {
        let z = simulate_ma1(0.5, 2000, 11);
        let m = fit_arima(&z, ArimaSpec::new(0, 0, 1).unwrap()).unwrap();
        assert!(
            (0.4..=0.6).contains(&m.ma[0]),
            "estimated theta = {}",
            m.ma[0]
        );
    }

    #[test]
    fn fit_with_trend_differences_cleanly() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let z: Vec<f64> = (0..2000)
            .map(|t| 0.5 * t as f64 + 0.3 * {
                let e: f64 = StandardNormal.sample(&mut rng);
                e
            })
            .collect();
        let m = fit_arima(&z, ArimaSpec::new(1, 1, 0).unwrap()).unwrap();
        // After differencing the trend becomes a constant; the residual mean
        // of the fitted model stays near zero.
        let w = difference(&z, 1).unwrap();
        let mut preds = Vec::new();
        for t in 1..w.len() {
            preds.push(w[t] - (m.intercept + m.ar[0] * w[t - 1]));
        }
        let mean = preds.iter().sum::<f64>() / preds.len() as f64;
        assert!(mean.abs() < 0.1, "residual mean {mean}");
    }

    #[test]
    fn forecast_zero_noise_ar1_halves() {
        let model = ArimaModel {
            spec: ArimaSpec::new(1, 0, 0).unwrap(),
            intercept: 0.0,
            ar: vec![0.5],
            ma: vec![],
            sigma: 0.0,
            heads: vec![],
            recent_w: vec![8.0],
            recent_eps: vec![],
        };
        let f = forecast_arima(&model, 3, &[0.1, 0.5, 0.9], "x").unwrap();
        let median = f.row(0.5).unwrap();
        assert!((median[0] - 4.0).abs() < 1e-12);
        assert!((median[1] - 2.0).abs() < 1e-12);
        assert!((median[2] - 1.0).abs() < 1e-12);
        // sigma = 0 makes all quantile rows identical.
        assert_eq!(f.values[0], f.values[2]);
    }

    #[test]
    fn forecast_median_equals_point_path() {
        let z = simulate_ar1(0.6, 500, 19);
        let m = fit_arima(&z, ArimaSpec::new(1, 0, 1).unwrap()).unwrap();
        let f = forecast_arima(&m, 5, &[0.2, 0.5, 0.8], "x").unwrap();
        let f2 = forecast_arima(&m, 5, &[0.5], "x").unwrap();
        assert_eq!(f.row(0.5).unwrap(), f2.row(0.5).unwrap());
        assert!(f.is_monotone());
    }

    #[test]
    fn arima_d0_equals_arma() {
        let z = simulate_ar1(0.7, 800, 23);
        let a = fit_arima(&z, ArimaSpec::new(2, 0, 1).unwrap()).unwrap();
        let b = fit_arima(&z, ArimaSpec { p: 2, d: 0, q: 1 }).unwrap();
        assert_eq!(a.ar, b.ar);
        assert_eq!(a.ma, b.ma);
    }
}
