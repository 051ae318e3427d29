//! The four default-hyperparameter local forecasters: ARIMA, ETS, NPTS and
//! a Prophet-style curve fitter.

mod arima;
mod ets;
mod npts;
mod prophet;

pub(crate) mod linalg;

pub use arima::{difference, fit_arima, forecast_arima, inverse_difference, pacf, ArimaModel, ArimaSpec};
pub use ets::{fit_ets, forecast_ets, fit_forecast_ets, EtsModel};
pub use npts::{forecast_npts, npts_weights, NptsSpec};
pub use prophet::{fit_forecast_prophet, fit_prophet, HolidaySet, ProphetModel, ProphetSpec, TrendKind};
