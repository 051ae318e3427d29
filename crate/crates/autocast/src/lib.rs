//! AutoML time-series forecasting ensemble engine.
//!
//! The crate trains six families of univariate forecasters (ARIMA, ETS,
//! NPTS, a Prophet-style curve fitter, and two small neural models), tunes
//! the learnable ones with Hyperband or Gaussian-process Bayesian
//! optimization, selects a combined local/global ensemble per item, and
//! analyzes the error-vs-latency trade-off of tuning configurations.

pub mod analysis;
pub mod classical;
pub mod ensemble;
pub mod error;
pub mod forecast;
pub mod hpo;
pub mod metrics;
pub mod neural;
pub mod pipeline;
pub mod svg;
pub mod timeseries;

pub use error::{Error, Result};
pub use forecast::QuantileForecast;
pub use timeseries::{Dataset, Freq, SplitSet, TimeSeries};

/// Default quantile levels used for avg-wQL when none are configured.
pub const DEFAULT_QUANTILES: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
