use serde::{Deserialize, Serialize};

use super::config::{RateSchedule, SimConfig};
use super::metrics::{m_n_bounds, pointwise_errors, sup_error_cdf, sup_error_quantile, QuantileEstimator};
use super::trial::{generate_trial, TrialResult};
use crate::cdf_fit::{fit_cdf_family, Interpolation};
use crate::error::{Error, Result};

/// Knobs for scoring a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOptions {
    pub interpolation: Interpolation,
    /// Extra probe points per design gap in linear mode; 9 splits each gap in ten.
    pub x_refine: usize,
    pub estimator: QuantileEstimator,
    /// Interior point for the single-point errors; `None` means the midpoint of `I`.
    pub x_o: Option<f64>,
    pub m_n_grid: usize,
    pub m_n_max_pairs: usize,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            interpolation: Interpolation::Linear,
            x_refine: 9,
            estimator: QuantileEstimator::Lower,
            x_o: None,
            m_n_grid: 64,
            m_n_max_pairs: 200_000,
        }
    }
}

/// Simulates one data set and measures every error.
pub fn run_trial(config: &SimConfig, n: usize, rep: usize, opts: &TrialOptions) -> Result<TrialResult> {
    let trial = generate_trial(config, n, rep)?;
    let fit = fit_cdf_family(&trial.groups).with_interpolation(opts.interpolation);
    let schedule = RateSchedule::uniform(config, n);
    let family = config.family;
    let sup_err_cdf = sup_error_cdf(&fit, &family, &schedule, opts.x_refine)?;
    let sup_err_quantile = match schedule.levels() {
        Ok(_) => Some(sup_error_quantile(&fit, &family, &schedule, opts.estimator)?),
        Err(_) => None,
    };
    let x_o = opts.x_o.unwrap_or(0.5 * (config.a + config.b));
    let (pointwise_err_cdf, pointwise_err_quantile) = pointwise_errors(&fit, &family, config, x_o, n)?;
    let mn = m_n_bounds(&trial.groups, family, opts.m_n_grid, opts.m_n_max_pairs);
    Ok(TrialResult {
        n,
        rep,
        sup_err_cdf,
        sup_err_quantile,
        pointwise_err_cdf,
        pointwise_err_quantile,
        m_n: mn.lower,
        m_n_upper: mn.upper,
        m_n_stride: mn.stride,
    })
}

/// Runs `config.reps` trials at every sample size, in order.
pub fn run_rate_study(config: &SimConfig, n_grid: &[usize], opts: &TrialOptions) -> Result<Vec<TrialResult>> {
    let mut out = Vec::with_capacity(n_grid.len() * config.reps);
    for &n in n_grid {
        for rep in 0..config.reps {
            out.push(run_trial(config, n, rep, opts)?);
        }
    }
    Ok(out)
}

/// Error column of a [`TrialResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorField {
    SupCdf,
    SupQuantile,
    PointwiseCdf,
    PointwiseQuantile,
}

impl ErrorField {
    pub fn get(&self, r: &TrialResult) -> Option<f64> {
        match self {
            ErrorField::SupCdf => Some(r.sup_err_cdf),
            ErrorField::SupQuantile => r.sup_err_quantile,
            ErrorField::PointwiseCdf => Some(r.pointwise_err_cdf),
            ErrorField::PointwiseQuantile => Some(r.pointwise_err_quantile),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ErrorField::SupCdf => "sup_err_cdf",
            ErrorField::SupQuantile => "sup_err_quantile",
            ErrorField::PointwiseCdf => "pointwise_err_cdf",
            ErrorField::PointwiseQuantile => "pointwise_err_quantile",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub n_values: Vec<usize>,
    #[serde(serialize_with = "crate::json::vec_f64_17")]
    pub mean_errors: Vec<f64>,
    #[serde(serialize_with = "crate::json::f64_17")]
    pub slope: f64,
    #[serde(serialize_with = "crate::json::f64_17")]
    pub max_scaled: f64,
    #[serde(serialize_with = "crate::json::f64_17")]
    pub min_scaled: f64,
}

/// Least-squares slope of `log(mean error)` against `log n`, and the extreme
/// values of `mean error / rate(n)` over the grid.
pub fn rate_fit(results: &[TrialResult], which: ErrorField, rate: impl Fn(usize) -> f64) -> Result<RateSummary> {
    let mut n_values: Vec<usize> = results.iter().map(|r| r.n).collect();
    n_values.sort_unstable();
    n_values.dedup();
    if n_values.len() < 4 {
        return Err(Error::InsufficientData(format!("{} distinct sample sizes, need 4", n_values.len())));
    }
    let mut mean_errors = Vec::with_capacity(n_values.len());
    for &n in &n_values {
        let errs: Vec<f64> = results.iter().filter(|r| r.n == n).filter_map(|r| which.get(r)).collect();
        if errs.len() < results.iter().filter(|r| r.n == n).count() {
            return Err(Error::InsufficientData(format!("{} missing at n = {n}", which.name())));
        }
        if errs.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::InsufficientData(format!("non-positive or non-finite error at n = {n}")));
        }
        mean_errors.push(errs.iter().sum::<f64>() / errs.len() as f64);
    }
    let lx: Vec<f64> = n_values.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = mean_errors.iter().map(|e| e.ln()).collect();
    let slope = ls_slope(&lx, &ly);
    let scaled: Vec<f64> = n_values.iter().zip(&mean_errors).map(|(&n, e)| e / rate(n)).collect();
    let max_scaled = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_scaled = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RateSummary { n_values, mean_errors, slope, max_scaled, min_scaled })
}

pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
