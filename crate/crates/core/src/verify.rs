//! Randomized property suites with machine-readable reports.
//!
//! Each suite draws its own instances from a seeded generator and counts, per
//! property, how many checks ran and how many failed.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::Uniform;
use crate::cdf_fit::fit_cdf_family;
use crate::error::{Error, Result};
use crate::isoreg::{
    brute_force_band, check_membership, minmax_band, minmax_orders, pava_antitonic_ls, IndexLoss, LossOracle,
    PinballOracle, SquaredLossOracle, DEFAULT_GRID_CAP,
};
use crate::order::DesignGroups;
use crate::quantile_fit::{pinball_risk, plugin_quantiles, quantile_band, smooth_band_curve};
use crate::sim::{dkw_mc, dkw_universal_constant, lln_constant, lln_exp_mc, trial_rng, Increment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Isoreg,
    Quantile,
    Dkw,
    Lln,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Isoreg => "isoreg",
            Suite::Quantile => "quantile",
            Suite::Dkw => "dkw",
            Suite::Lln => "lln",
        }
    }

    /// Random instances for the combinatorial suites, Monte Carlo samples otherwise.
    pub fn default_reps(&self) -> u64 {
        match self {
            Suite::Isoreg | Suite::Quantile => 200,
            Suite::Dkw | Suite::Lln => 10_000,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "isoreg" => Ok(Suite::Isoreg),
            "quantile" => Ok(Suite::Quantile),
            "dkw" => Ok(Suite::Dkw),
            "lln" => Ok(Suite::Lln),
            _ => Err(Error::Precondition(format!("unknown suite '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub name: String,
    pub checked: u64,
    pub violations: u64,
    pub pass: bool,
    /// First violation, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub reps: u64,
    pub properties: Vec<PropertyReport>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Default)]
struct Tally {
    checked: u64,
    violations: u64,
    detail: Option<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.detail.is_none() {
                self.detail = Some(what());
            }
        }
    }

    fn report(self, name: &str) -> PropertyReport {
        PropertyReport {
            name: name.to_string(),
            checked: self.checked,
            pass: self.violations == 0 && self.checked > 0,
            violations: self.violations,
            detail: self.detail,
        }
    }
}

pub fn run_suite(suite: Suite, seed: u64, reps: u64) -> Result<SuiteReport> {
    if reps == 0 {
        return Err(Error::Precondition("reps must be positive".into()));
    }
    let properties = match suite {
        Suite::Isoreg => isoreg_suite(seed, reps)?,
        Suite::Quantile => quantile_suite(seed, reps)?,
        Suite::Dkw => dkw_suite(seed, reps),
        Suite::Lln => lln_suite(seed, reps),
    };
    let pass = properties.iter().all(|p| p.pass);
    Ok(SuiteReport { suite, seed, reps, properties, pass })
}

/// Exact least-squares antitonic fit by enumerating all partitions into
/// consecutive blocks whose means are non-increasing.
pub fn antitonic_ls_by_partitions(targets: &[f64], weights: &[f64]) -> Vec<f64> {
    let m = targets.len();
    assert!((1..=20).contains(&m), "partition enumeration needs 1 <= m <= 20");
    let mut best = (f64::INFINITY, Vec::new());
    for cuts in 0u32..(1 << (m - 1)) {
        let mut fit = Vec::with_capacity(m);
        let mut start = 0;
        let mut prev = f64::INFINITY;
        let mut ok = true;
        for end in 1..=m {
            if end == m || cuts & (1 << (end - 1)) != 0 {
                let w: f64 = weights[start..end].iter().sum();
                let s: f64 = (start..end).map(|i| weights[i] * targets[i]).sum();
                let mean = s / w;
                if mean > prev {
                    ok = false;
                    break;
                }
                prev = mean;
                fit.extend(std::iter::repeat_n(mean, end - start));
                start = end;
            }
        }
        if !ok {
            continue;
        }
        let sse: f64 = (0..m).map(|i| weights[i] * (targets[i] - fit[i]).powi(2)).sum();
        if sse < best.0 {
            best = (sse, fit);
        }
    }
    best.1
}

/// `x_j = min_{a<=j} max_{b>=j}` of the weighted mean over `a..=b`, evaluated
/// directly in `O(m^3)`.
pub fn antitonic_ls_minmax(targets: &[f64], weights: &[f64]) -> Vec<f64> {
    let m = targets.len();
    let mean = |a: usize, b: usize| {
        let w: f64 = weights[a..=b].iter().sum();
        (a..=b).map(|i| weights[i] * targets[i]).sum::<f64>() / w
    };
    (0..m)
        .map(|j| (0..=j).map(|a| (j..m).map(|b| mean(a, b)).fold(f64::NEG_INFINITY, f64::max)).fold(f64::INFINITY, f64::min))
        .collect()
}

fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn random_ls_instance(rng: &mut ChaCha8Rng, max_m: usize) -> (Vec<f64>, Vec<f64>) {
    let m = rng.random_range(1..=max_m);
    let tied = rng.random_bool(0.5);
    let targets = (0..m)
        .map(|_| if tied { rng.random_range(0..4) as f64 / 4.0 } else { rng.random::<f64>() })
        .collect();
    let weights = (0..m).map(|_| rng.random_range(1..=5) as f64).collect();
    (targets, weights)
}

/// Grouped data with at most `max_m` design points and `max_n` responses drawn
/// from a small integer set, so ties and plateaus are common.
pub fn random_groups(rng: &mut ChaCha8Rng, max_m: usize, max_n: usize, levels: u32) -> DesignGroups {
    let m = rng.random_range(1..=max_m.min(max_n));
    let n = rng.random_range(m..=max_n);
    let mut xs: Vec<f64> = (0..m).map(|j| j as f64).collect();
    xs.extend((m..n).map(|_| rng.random_range(0..m) as f64));
    let ys: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
    DesignGroups::from_pairs(&xs, &ys).expect("generated data is finite")
}

fn pinball_losses(groups: &DesignGroups, beta: f64) -> Vec<IndexLoss> {
    (0..groups.m())
        .map(|j| IndexLoss::Pinball { beta, responses: groups.responses(j).to_vec() })
        .collect()
}

/// Distinct responses and the midpoints between neighbours.
fn enriched_grid(groups: &DesignGroups) -> Vec<f64> {
    let v = groups.distinct_responses();
    let mut g = v.clone();
    g.extend(v.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    g.sort_by(f64::total_cmp);
    g
}

fn random_partition(rng: &mut ChaCha8Rng, a: usize, b: usize) -> Vec<(usize, usize)> {
    let mut parts = Vec::new();
    let mut start = a;
    for i in a..b {
        if rng.random_bool(0.5) {
            parts.push((start, i));
            start = i + 1;
        }
    }
    parts.push((start, b));
    parts
}

fn partition_check<O: LossOracle>(rng: &mut ChaCha8Rng, oracle: &O, tally: &mut Tally) {
    let m = oracle.len();
    let a = rng.random_range(0..m);
    let b = rng.random_range(a..m);
    let (l, u) = oracle.interval_minimizers(a, b);
    let parts: Vec<(f64, f64)> = random_partition(rng, a, b)
        .into_iter()
        .map(|(s, e)| oracle.interval_minimizers(s, e))
        .collect();
    let tol = oracle.tolerance();
    let lmin = parts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let lmax = parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let umin = parts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let umax = parts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let ok = lmin <= l + tol && l <= lmax + tol && umin <= u + tol && u <= umax + tol;
    tally.check(ok, || format!("interval {a}..={b}: L = {l}, U = {u}, parts {parts:?}"));
}

fn orders_agree<O: LossOracle>(oracle: &O, tally: &mut Tally) {
    let o = minmax_orders(oracle);
    let tol = oracle.tolerance().max(1e-12);
    let dl = max_abs_diff(&o.lower_maxmin, &o.lower_minmax);
    let du = max_abs_diff(&o.upper_maxmin, &o.upper_minmax);
    tally.check(dl <= tol && du <= tol, || format!("orders differ by {dl} / {du}"));
}

fn isoreg_suite(seed: u64, reps: u64) -> Result<Vec<PropertyReport>> {
    let mut rng = trial_rng(seed, 0, 100);
    let mut pava_brute = Tally::default();
    let mut pava_formula = Tally::default();
    let mut orders = Tally::default();
    let mut partitions = Tally::default();
    let mut lattice = Tally::default();
    let mut extremal = Tally::default();
    let mut membership = Tally::default();

    for _ in 0..reps {
        let (t, w) = random_ls_instance(&mut rng, 8);
        let fit = pava_antitonic_ls(&t, &w)?;
        let brute = antitonic_ls_by_partitions(&t, &w);
        let d = max_abs_diff(&fit, &brute);
        pava_brute.check(d <= 1e-12, || format!("targets {t:?} weights {w:?}: deviation {d}"));
        let formula = antitonic_ls_minmax(&t, &w);
        let d = max_abs_diff(&fit, &formula);
        pava_formula.check(d <= 1e-12, || format!("targets {t:?} weights {w:?}: deviation {d}"));

        let sq = SquaredLossOracle::new(t, w)?;
        orders_agree(&sq, &mut orders);
        partition_check(&mut rng, &sq, &mut partitions);

        let beta = [0.25, 0.5, 0.75][rng.random_range(0..3)];
        let groups = random_groups(&mut rng, 4, 8, 5);
        let oracle = PinballOracle::new(&groups, beta)?;
        orders_agree(&oracle, &mut orders);
        partition_check(&mut rng, &oracle, &mut partitions);
        let band = minmax_band(&oracle)?;
        let bf = brute_force_band(&pinball_losses(&groups, beta), &enriched_grid(&groups), DEFAULT_GRID_CAP)?;

        let inside = bf.minimizers.iter().all(|q| {
            q.iter().zip(&band.lower).all(|(x, l)| l <= x) && q.iter().zip(&band.upper).all(|(x, u)| x <= u)
        });
        extremal.check(inside && bf.band == band, || format!("band {band:?}, brute force {:?}", bf.band));

        let i = rng.random_range(0..bf.minimizers.len());
        let k = rng.random_range(0..bf.minimizers.len());
        let (x1, x2) = (&bf.minimizers[i], &bf.minimizers[k]);
        let lo: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| a.min(*b)).collect();
        let hi: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| a.max(*b)).collect();
        let ok = check_membership(&oracle, x1)?
            && check_membership(&oracle, x2)?
            && check_membership(&oracle, &lo)?
            && check_membership(&oracle, &hi)?;
        lattice.check(ok, || format!("members {x1:?}, {x2:?}"));

        // blockwise mixtures of the band ends that only step up where the band does
        let m = band.len();
        let cuts = band.increase_positions();
        let mut x = Vec::with_capacity(m);
        let mut lambda: f64 = rng.random();
        for j in 0..m {
            if j > 0 && cuts.contains(&(j - 1)) {
                lambda = rng.random();
            }
            x.push((band.lower[j] + lambda * (band.upper[j] - band.lower[j])).min(band.upper[j]));
        }
        if x.windows(2).all(|p| p[0] <= p[1]) {
            let member = check_membership(&oracle, &x)?;
            let risk = pinball_risk(&groups, &x, beta)?.value;
            membership.check(member && rel_close(risk, bf.min_loss, 1e-10), || {
                format!("x = {x:?}: member {member}, risk {risk} vs {}", bf.min_loss)
            });
        }
    }
    Ok(vec![
        pava_brute.report("pava_matches_partition_enumeration"),
        pava_formula.report("pava_matches_minmax_formula"),
        orders.report("minmax_equals_maxmin"),
        partitions.report("partition_mean_value"),
        lattice.report("lattice_closure"),
        extremal.report("extremal_minimizers"),
        membership.report("band_membership_rule"),
    ])
}

fn quantile_suite(seed: u64, reps: u64) -> Result<Vec<PropertyReport>> {
    let mut rng = trial_rng(seed, 0, 200);
    let mut equality = Tally::default();
    let mut optimal = Tally::default();
    let mut linear = Tally::default();
    let mut monotone = Tally::default();
    let mut empty = Tally::default();
    let mut smooth = Tally::default();

    for _ in 0..reps {
        let groups = random_groups(&mut rng, 10, 30, 8);
        let fit = fit_cdf_family(&groups);
        let beta = rng.random_range(1..=9) as f64 / 10.0;
        let band = quantile_band(&groups, beta)?;
        let plug = plugin_quantiles(&fit, beta)?;
        equality.check(band == plug, || format!("beta {beta}: band {band:?}, plug-in {plug:?}"));

        let beta2 = (beta + rng.random_range(1..=3) as f64 / 10.0).min(0.95);
        let band2 = quantile_band(&groups, beta2)?;
        let ok = (0..band.len()).all(|j| band.lower[j] <= band2.lower[j] && band.upper[j] <= band2.upper[j]);
        monotone.check(ok, || format!("beta {beta} vs {beta2}"));

        let bad = (0..groups.m()).find(|&j| {
            groups.responses(j).iter().any(|&y| band.lower[j] < y && y < band.upper[j])
        });
        empty.check(bad.is_none(), || format!("data inside band at index {bad:?}"));

        let curve = smooth_band_curve(&band)?;
        let q = &curve.knots;
        let feasible = q.windows(2).all(|w| w[0] <= w[1])
            && (0..q.len()).all(|j| band.lower[j] <= q[j] && q[j] <= band.upper[j]);
        let r_curve = pinball_risk(&groups, q, beta)?.value;
        let r_low = pinball_risk(&groups, &band.lower, beta)?.value;
        smooth.check(feasible && r_curve >= r_low * (1.0 - 1e-12), || {
            format!("smooth knots {q:?}: risk {r_curve} vs {r_low}")
        });

        let small = random_groups(&mut rng, 4, 8, 5);
        let beta = [0.25, 0.5, 0.75][rng.random_range(0..3)];
        let band = quantile_band(&small, beta)?;
        let bf = brute_force_band(&pinball_losses(&small, beta), &enriched_grid(&small), DEFAULT_GRID_CAP)?;
        let rl = pinball_risk(&small, &band.lower, beta)?.value;
        let ru = pinball_risk(&small, &band.upper, beta)?.value;
        let bracket = bf.minimizers.iter().all(|q| (0..q.len()).all(|j| band.lower[j] <= q[j] && q[j] <= band.upper[j]));
        optimal.check(bracket && rel_close(rl, bf.min_loss, 1e-10) && rel_close(ru, bf.min_loss, 1e-10), || {
            format!("risks {rl}, {ru} vs brute force {}", bf.min_loss)
        });

        let lambda: f64 = rng.random();
        let mix: Vec<f64> = (0..band.len()).map(|j| (1.0 - lambda) * band.lower[j] + lambda * band.upper[j]).collect();
        let rm = pinball_risk(&small, &mix, beta)?.value;
        linear.check(rel_close(rm, rl, 1e-10), || format!("lambda {lambda}: risk {rm} vs {rl}"));
    }
    Ok(vec![
        equality.report("plugin_equals_band"),
        optimal.report("band_ends_optimal"),
        linear.report("risk_linear_on_band"),
        monotone.report("band_monotone_in_beta"),
        empty.report("no_data_inside_band"),
        smooth.report("smooth_curve_feasible"),
    ])
}

pub const DKW_ETAS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

/// `F_i = Uniform(0, 1 + i/k)`, `i = 1..=k`.
pub fn heterogeneous_uniforms(k: usize) -> Vec<Uniform> {
    (1..=k).map(|i| Uniform::new(0.0, 1.0 + i as f64 / k as f64)).collect()
}

fn dkw_suite(seed: u64, reps: u64) -> Vec<PropertyReport> {
    let dists = heterogeneous_uniforms(100);
    let res = dkw_mc(&dists, &DKW_ETAS, reps, seed);
    let mut universal = Tally::default();
    let mut sharp = Tally::default();
    for e in res {
        let tail = (-2.0 * e.eta * e.eta).exp();
        let f = e.frequency();
        universal.check(f <= dkw_universal_constant() * tail, || format!("eta {}: {f}", e.eta));
        let b = 2.0 * tail + 3.0 * e.standard_error();
        sharp.check(f <= b, || format!("eta {}: {f} > {b}", e.eta));
    }
    vec![universal.report("universal_constant_bound"), sharp.report("two_exp_bound_within_3se")]
}

pub const LLN_ETAS: [f64; 2] = [0.3, 0.5];
pub const LLN_N_OS: [usize; 2] = [50, 200];
pub const LLN_N_MAX: usize = 5000;

fn lln_suite(seed: u64, reps: u64) -> Vec<PropertyReport> {
    let law = Increment::Rademacher { scale: 0.5 };
    let (c, big_c) = law.hoeffding();
    let c_prime = 1.5;
    let cp = lln_constant(c, c_prime, big_c);
    let mut bound = Tally::default();
    for (n_o, e) in lln_exp_mc(&LLN_N_OS, LLN_N_MAX, &LLN_ETAS, reps, seed, law) {
        let b = cp * (-c_prime * n_o as f64 * e.eta * e.eta).exp();
        bound.check(e.frequency() <= b, || format!("n_o {n_o}, eta {}: {} > {b}", e.eta, e.frequency()));
    }
    let mut trivial = Tally::default();
    let above = law.bound() * 1.02;
    for (n_o, e) in lln_exp_mc(&[1, 50], 500, &[above], reps.min(1000), seed ^ 1, law) {
        trivial.check(e.count == 0, || format!("n_o {n_o}: {} exceedances above the increment bound", e.count));
    }
    vec![bound.report("exponential_bound"), trivial.report("zero_above_increment_bound")]
}
