//! Estimation of conditional distribution functions under a stochastic-order
//! constraint on the covariate, with isotonic regression quantiles and a
//! simulation harness for convergence rates.

pub mod analytic;
pub mod cdf_fit;
pub mod error;
pub mod isoreg;
pub mod json;
pub mod order;
pub mod quantile_fit;
pub mod sim;
pub mod verify;

pub use cdf_fit::{evaluate_cdf, fit_cdf_family, CdfFamilyFit, Interpolation};
pub use error::{Error, Result};
pub use order::{step_quantile, DesignGroups, Observation, Side, StepCdf};
pub use quantile_fit::{pinball_risk, plugin_quantiles, quantile_band, smooth_band_curve, PinballRisk, QuantileBand, SmoothCurve};
pub use json::format_f64;
