use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Design, Family, SimConfig};
use crate::error::{Error, Result};
use crate::order::DesignGroups;

/// Generator for trial `rep` at sample size `n`: the seed picks the key and
/// `(n, rep)` picks the stream, so trials do not depend on execution order.
pub fn trial_rng(seed: u64, n: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | rep as u64);
    rng
}

/// Simulated data together with the family it was drawn from.
#[derive(Debug, Clone)]
pub struct Trial {
    pub groups: DesignGroups,
    pub family: Family,
    pub n: usize,
    pub rep: usize,
}

pub fn design_points<R: Rng + ?Sized>(config: &SimConfig, n: usize, rng: &mut R) -> Vec<f64> {
    let (a, b) = (config.a, config.b);
    match config.design {
        Design::FixedEquispaced => (1..=n).map(|i| a + (i as f64 / n as f64) * (b - a)).collect(),
        Design::IidUniform => (0..n).map(|_| a + rng.random::<f64>() * (b - a)).collect(),
    }
}

/// Draws `n` pairs with `Y_i ~ F_{X_i}` given the design.
pub fn generate_trial(config: &SimConfig, n: usize, rep: usize) -> Result<Trial> {
    if n < 2 {
        return Err(Error::Precondition("need n >= 2".into()));
    }
    config.validate()?;
    let mut rng = trial_rng(config.seed, n, rep);
    let xs = design_points(config, n, &mut rng);
    let ys: Vec<f64> = xs.iter().map(|&x| config.family.sample(x, &mut rng)).collect();
    let groups = DesignGroups::from_pairs(&xs, &ys)?;
    Ok(Trial { groups, family: config.family, n, rep })
}

/// Smallest value of `w_n(J) / (n |J|)` over closed intervals `J` inside
/// `[a, b]` whose length is `delta * (1 + i / 10)` for `i = 0..=10`. Every
/// interval of length at least `delta` splits into pieces with lengths in
/// `[delta, 2 delta]`, so this probes the design-density event on a length grid.
pub fn design_density_ratio(xs_sorted: &[f64], a: f64, b: f64, delta: f64) -> f64 {
    let n = xs_sorted.len() as f64;
    let mut worst = f64::INFINITY;
    for i in 0..=10 {
        let len = delta * (1.0 + i as f64 / 10.0);
        if len > b - a {
            break;
        }
        // a window with fewest points starts at a, just right of a point, or ends at b
        let count = |lo_open: bool, lo: f64, hi: f64| {
            let start = if lo_open {
                xs_sorted.partition_point(|&x| x <= lo)
            } else {
                xs_sorted.partition_point(|&x| x < lo)
            };
            let end = xs_sorted.partition_point(|&x| x <= hi);
            end.saturating_sub(start)
        };
        let mut min_count = count(false, a, a + len).min(count(false, b - len, b));
        for &x in xs_sorted {
            if x >= a && x + len <= b {
                min_count = min_count.min(count(true, x, x + len));
            }
        }
        worst = worst.min(min_count as f64 / (n * len));
    }
    worst
}

/// Measured errors for one simulated data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub n: usize,
    pub rep: usize,
    pub sup_err_cdf: f64,
    /// `None` when `B_n` is empty at this `n`.
    pub sup_err_quantile: Option<f64>,
    pub pointwise_err_cdf: f64,
    pub pointwise_err_quantile: f64,
    /// Grid lower bound on `M_n` over the examined pairs.
    pub m_n: f64,
    /// Grid upper bound on `M_n` over the examined pairs.
    pub m_n_upper: f64,
    /// Stride of the examined `(r, s)` pairs; bounds cover all pairs when 1.
    pub m_n_stride: usize,
}
