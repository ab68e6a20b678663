//! Simulation harness for the convergence rates and the exponential
//! inequalities behind them.

mod config;
mod mc;
mod metrics;
mod rate;
mod trial;

pub use config::{Design, Family, RateSchedule, SimConfig};
pub use mc::{
    dkw_mc, dkw_universal_constant, lln_constant, lln_exp_mc, scaled_sup_distance, Exceedance, Increment,
};
pub use metrics::{
    level_grid, m_n_bounds, pointwise_errors, sup_error_cdf, sup_error_quantile, ConditionalCdf,
    ConditionalQuantile, MnBounds, QuantileEstimator,
};
pub use rate::{rate_fit, run_rate_study, run_trial, ErrorField, RateSummary, TrialOptions};
pub use trial::{design_density_ratio, design_points, generate_trial, trial_rng, Trial, TrialResult};
