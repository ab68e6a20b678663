//! Sup-norm errors of fitted distribution functions and quantiles against a
//! known truth, and bounds on the pooled-deviation statistic `M_n`.
//!
//! Fitted rows are step functions in `y` that only move at thresholds, and the
//! truth is continuous and increasing in `y`. Between two moves of a fitted
//! value the error is therefore largest at an end of the flat stretch, so it
//! suffices to compare at each move: the old value against the truth's left
//! limit and the new value against the truth. The columns of the fit are swept
//! once and only rows that change are touched.

use serde::{Deserialize, Serialize};

use super::config::{Family, RateSchedule, SimConfig};
use crate::cdf_fit::{CdfFamilyFit, Interpolation, RowMix};
use crate::error::{Error, Result};
use crate::order::{DesignGroups, Side};
use crate::quantile_fit::{plugin_quantiles, smooth_band_curve};

/// Reference conditional distribution functions. `cdf_left` is the left limit
/// in `y`; it only differs from `cdf` for a discontinuous reference.
pub trait ConditionalCdf {
    fn cdf(&self, x: f64, y: f64) -> f64;
    fn cdf_left(&self, x: f64, y: f64) -> f64 {
        self.cdf(x, y)
    }
}

/// Reference conditional quantile functions: `quantile` is the minimal and
/// `quantile_plus` the maximal quantile.
pub trait ConditionalQuantile {
    fn quantile(&self, x: f64, beta: f64) -> f64;
    fn quantile_plus(&self, x: f64, beta: f64) -> f64 {
        self.quantile(x, beta)
    }
}

impl ConditionalCdf for Family {
    fn cdf(&self, x: f64, y: f64) -> f64 {
        Family::cdf(self, x, y)
    }
}

impl ConditionalQuantile for Family {
    fn quantile(&self, x: f64, beta: f64) -> f64 {
        Family::quantile(self, x, beta)
    }
}

impl ConditionalCdf for CdfFamilyFit {
    fn cdf(&self, x: f64, y: f64) -> f64 {
        self.evaluate(x, y).expect("finite query")
    }

    fn cdf_left(&self, x: f64, y: f64) -> f64 {
        match self.thresholds().partition_point(|&t| t < y) {
            0 => 0.0,
            k => self.evaluate(x, self.thresholds()[k - 1]).expect("finite query"),
        }
    }
}

impl ConditionalQuantile for CdfFamilyFit {
    fn quantile(&self, x: f64, beta: f64) -> f64 {
        self.cdf_at(x).quantile(beta, Side::Minimal).expect("level in (0, 1)")
    }

    fn quantile_plus(&self, x: f64, beta: f64) -> f64 {
        self.cdf_at(x).quantile(beta, Side::Maximal).expect("level in (0, 1)")
    }
}

/// A covariate value at which the fit is compared with the truth.
#[derive(Debug, Clone, Copy)]
struct Probe {
    x: f64,
    mix: RowMix,
}

/// Calls `visit(p, k, old, new)` whenever the fitted value of probe `p`
/// changes at threshold `k`.
fn sweep_probes(fit: &CdfFamilyFit, probes: &[Probe], mut visit: impl FnMut(usize, usize, f64, f64)) {
    let m = fit.m();
    let rows_of = |p: &Probe| {
        let (lo, hi) = (p.mix.lo, p.mix.hi);
        [Some(lo), (hi != lo).then_some(hi)].into_iter().flatten()
    };
    // probes grouped by the rows they read from
    let mut start = vec![0usize; m + 1];
    for p in probes {
        for j in rows_of(p) {
            start[j + 1] += 1;
        }
    }
    for j in 0..m {
        start[j + 1] += start[j];
    }
    let mut of_row = vec![0usize; start[m]];
    let mut fill = start.clone();
    for (i, p) in probes.iter().enumerate() {
        for j in rows_of(p) {
            of_row[fill[j]] = i;
            fill[j] += 1;
        }
    }
    let row_lo = probes.iter().map(|p| p.mix.lo).min().unwrap_or(0);
    let row_hi = probes.iter().map(|p| p.mix.hi).max().unwrap_or(0);

    let mut cur = vec![0.0f64; m];
    let mut value = vec![0.0f64; probes.len()];
    let mut stamp = vec![usize::MAX; probes.len()];
    let mut changed = Vec::new();
    for k in 0..fit.thresholds().len() {
        changed.clear();
        for (s, e, v) in fit.column_runs(k) {
            if e <= row_lo || s > row_hi {
                continue;
            }
            for j in s.max(row_lo)..e.min(row_hi + 1) {
                if cur[j] != v {
                    cur[j] = v;
                    changed.push(j);
                }
            }
        }
        for &j in &changed {
            for &p in &of_row[start[j]..start[j + 1]] {
                if stamp[p] == k {
                    continue;
                }
                stamp[p] = k;
                let mix = probes[p].mix;
                let new = if mix.t == 0.0 { cur[mix.lo] } else { (1.0 - mix.t) * cur[mix.lo] + mix.t * cur[mix.hi] };
                let old = value[p];
                if new != old {
                    value[p] = new;
                    visit(p, k, old, new);
                }
            }
        }
    }
}

fn in_interval(x: f64, (lo, hi): (f64, f64)) -> bool {
    lo <= x && x <= hi
}

/// Probes covering the sup over `x` in `[lo, hi]`: the end points and design
/// points, plus for step modes the far end of each constant stretch, and for
/// linear mode `refine` evenly spaced points inside every gap.
fn cdf_probes(fit: &CdfFamilyFit, (lo, hi): (f64, f64), refine: usize) -> Vec<Probe> {
    let xs = fit.xs();
    let mut probes = vec![Probe { x: lo, mix: fit.row_mix(lo) }, Probe { x: hi, mix: fit.row_mix(hi) }];
    for (j, &x) in xs.iter().enumerate() {
        if in_interval(x, (lo, hi)) {
            probes.push(Probe { x, mix: RowMix { lo: j, hi: j, t: 0.0 } });
        }
    }
    for j in 0..xs.len().saturating_sub(1) {
        let (x0, x1) = (xs[j], xs[j + 1]);
        if x1 <= lo || x0 >= hi {
            continue;
        }
        match fit.interpolation() {
            Interpolation::StepLeft => {
                // row j holds up to the left limit at x1
                let row = RowMix { lo: j, hi: j, t: 0.0 };
                probes.push(Probe { x: if x1 <= hi { x1.next_down() } else { hi }, mix: row });
            }
            Interpolation::StepRight => {
                let row = RowMix { lo: j + 1, hi: j + 1, t: 0.0 };
                probes.push(Probe { x: if x0 >= lo { x0.next_up() } else { lo }, mix: row });
            }
            Interpolation::Linear => {
                for i in 1..=refine {
                    let x = x0 + (x1 - x0) * i as f64 / (refine + 1) as f64;
                    if in_interval(x, (lo, hi)) {
                        probes.push(Probe { x, mix: fit.row_mix(x) });
                    }
                }
            }
        }
    }
    probes
}

/// `sup_{x in I_n, y} |F_hat_x(y) - F_x(y)|`.
///
/// Exact in `y`. In `x` it is exact for the step modes; for linear mode the
/// sup is taken over design points, the ends of `I_n` and `x_refine` extra
/// points per gap.
pub fn sup_error_cdf<T: ConditionalCdf + ?Sized>(
    fit: &CdfFamilyFit,
    truth: &T,
    schedule: &RateSchedule,
    x_refine: usize,
) -> Result<f64> {
    let interval = schedule.interval()?;
    Ok(cdf_error_at(fit, truth, &cdf_probes(fit, interval, x_refine)))
}

fn cdf_error_at<T: ConditionalCdf + ?Sized>(fit: &CdfFamilyFit, truth: &T, probes: &[Probe]) -> f64 {
    let ys = fit.thresholds();
    let mut worst: f64 = 0.0;
    sweep_probes(fit, probes, |p, k, old, new| {
        let x = probes[p].x;
        worst = worst.max((old - truth.cdf_left(x, ys[k])).abs());
        worst = worst.max((new - truth.cdf(x, ys[k])).abs());
    });
    worst
}

/// Which plug-in quantile estimator to score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileEstimator {
    /// Minimal quantiles of the fitted rows (the band's lower end).
    Lower,
    /// Maximal quantiles of the fitted rows (the band's upper end).
    Upper,
    /// Smooth curve through the band, evaluated on a grid of levels.
    Smooth { beta_grid: usize },
}

/// `sup_{x, beta in B_n} |Q_hat_x(beta) - Q_x(beta)|` over design points in `I_n`.
///
/// For the band ends the sup over `beta` is exact: a fitted row that moves from
/// `old` to `new` at threshold `y_k` has quantile `y_k` for levels between the
/// two, and the truth is monotone there. Over the open `B_n` the two band ends
/// have the same supremum.
pub fn sup_error_quantile<T: ConditionalQuantile + ?Sized>(
    fit: &CdfFamilyFit,
    truth: &T,
    schedule: &RateSchedule,
    estimator: QuantileEstimator,
) -> Result<f64> {
    let levels = schedule.levels()?;
    let interval = schedule.interval()?;
    let rows: Vec<usize> = (0..fit.m()).filter(|&j| in_interval(fit.xs()[j], interval)).collect();
    if rows.is_empty() {
        return Err(Error::DegenerateSchedule(format!("no design point in I_n at n = {}", schedule.n)));
    }
    match estimator {
        QuantileEstimator::Lower | QuantileEstimator::Upper => {
            let probes: Vec<Probe> = rows
                .iter()
                .map(|&j| Probe { x: fit.xs()[j], mix: RowMix { lo: j, hi: j, t: 0.0 } })
                .collect();
            Ok(quantile_error_at(fit, truth, &probes, levels))
        }
        QuantileEstimator::Smooth { beta_grid } => {
            let mut worst: f64 = 0.0;
            for beta in level_grid(levels, beta_grid) {
                let curve = smooth_band_curve(&plugin_quantiles(fit, beta)?)?;
                for &j in &rows {
                    worst = worst.max((curve.knots[j] - truth.quantile(fit.xs()[j], beta)).abs());
                }
            }
            Ok(worst)
        }
    }
}

/// `count` levels spread evenly over the open interval.
pub fn level_grid((lo, hi): (f64, f64), count: usize) -> Vec<f64> {
    (0..count).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / count as f64).collect()
}

fn quantile_error_at<T: ConditionalQuantile + ?Sized>(
    fit: &CdfFamilyFit,
    truth: &T,
    probes: &[Probe],
    (b1, b2): (f64, f64),
) -> f64 {
    let ys = fit.thresholds();
    let mut worst: f64 = 0.0;
    sweep_probes(fit, probes, |p, k, old, new| {
        let (lo, hi) = (old.max(b1), new.min(b2));
        if lo < hi {
            let x = probes[p].x;
            worst = worst.max((ys[k] - truth.quantile_plus(x, lo)).abs());
            worst = worst.max((ys[k] - truth.quantile(x, hi)).abs());
        }
    });
    worst
}

/// Single-point errors at `x_o`: `sup_y |F_hat - F|` and the sup of the lower
/// plug-in quantile error over `B_n` of the pointwise schedule
/// (`delta_n = C3 n^{-1/(2 alpha + 1)}`, no log factor).
pub fn pointwise_errors<T: ConditionalCdf + ConditionalQuantile + ?Sized>(
    fit: &CdfFamilyFit,
    truth: &T,
    config: &SimConfig,
    x_o: f64,
    n: usize,
) -> Result<(f64, f64)> {
    if !(config.a < x_o && x_o < config.b) {
        return Err(Error::Precondition(format!("x_o = {x_o} not interior to [{}, {}]", config.a, config.b)));
    }
    let schedule = RateSchedule::pointwise(config, n);
    let probe = [Probe { x: x_o, mix: fit.row_mix(x_o) }];
    let cdf = cdf_error_at(fit, truth, &probe);
    let quantile = quantile_error_at(fit, truth, &probe, schedule.levels()?);
    Ok((cdf, quantile))
}

/// Bounds on `M_n = max_{r <= s} w_rs^{1/2} ||F_hat_rs - F_bar_rs||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MnBounds {
    /// Sup over the `y` grid, a lower bound.
    pub lower: f64,
    /// Sup of the bracket between grid points, an upper bound.
    pub upper: f64,
    /// Pairs `(r, s)` are taken from indices `0, stride, 2 stride, ...` and
    /// the last index; with stride 1 both bounds cover every pair.
    pub stride: usize,
}

/// Evaluates pooled deviations on `grid` response quantiles for index pairs
/// on a stride chosen so that at most `max_pairs` pairs are examined.
pub fn m_n_bounds(groups: &DesignGroups, family: Family, grid: usize, max_pairs: usize) -> MnBounds {
    let m = groups.m();
    let mut all: Vec<f64> = groups.all_responses().map(|(_, y)| y).collect();
    all.sort_by(f64::total_cmp);
    let g = grid.clamp(2, all.len().max(2));
    let mut ys: Vec<f64> = (0..g).map(|i| all[i * (all.len() - 1) / (g - 1)]).collect();
    ys.dedup();
    let g = ys.len();

    // prefix sums over groups: counts <= y, counts < y, expected counts
    let width = 3 * g;
    let mut prefix = vec![0.0f64; (m + 1) * width];
    let mut weight = vec![0.0f64; m + 1];
    for j in 0..m {
        let (head, tail) = prefix.split_at_mut((j + 1) * width);
        let prev = &head[j * width..];
        let row = &mut tail[..width];
        let resp = groups.responses(j);
        let w = groups.weights()[j] as f64;
        let x = groups.xs()[j];
        for (i, &y) in ys.iter().enumerate() {
            row[3 * i] = prev[3 * i] + resp.partition_point(|&v| v <= y) as f64;
            row[3 * i + 1] = prev[3 * i + 1] + resp.partition_point(|&v| v < y) as f64;
            row[3 * i + 2] = prev[3 * i + 2] + w * family.cdf(x, y);
        }
        weight[j + 1] = weight[j] + w;
    }

    let pairs = m * (m + 1) / 2;
    let stride = if pairs <= max_pairs.max(1) {
        1
    } else {
        ((pairs as f64 / max_pairs.max(1) as f64).sqrt().ceil() as usize).max(1)
    };
    let mut idx: Vec<usize> = (0..m).step_by(stride).collect();
    if *idx.last().unwrap() != m - 1 {
        idx.push(m - 1);
    }

    let (mut lower, mut upper): (f64, f64) = (0.0, 0.0);
    for (ri, &r) in idx.iter().enumerate() {
        let base = &prefix[r * width..(r + 1) * width];
        for &s in &idx[ri..] {
            let top = &prefix[(s + 1) * width..(s + 2) * width];
            let w = weight[s + 1] - weight[r];
            let at = |i: usize| (top[3 * i] - base[3 * i], top[3 * i + 1] - base[3 * i + 1], top[3 * i + 2] - base[3 * i + 2]);
            let (mut lo, mut up): (f64, f64) = (0.0, 0.0);
            let (le0, lt0, t0) = at(0);
            up = up.max(lt0).max(t0);
            let mut prev = (le0, lt0, t0);
            lo = lo.max((le0 - t0).abs()).max((lt0 - t0).abs());
            for i in 1..g {
                let (le, lt, t) = at(i);
                lo = lo.max((le - t).abs()).max((lt - t).abs());
                up = up.max(lt - prev.2).max(t - prev.0);
                prev = (le, lt, t);
            }
            up = up.max(w - prev.0).max(w - prev.2);
            let scale = w.sqrt().recip();
            lower = lower.max(lo * scale);
            upper = upper.max(up * scale);
        }
    }
    MnBounds { lower, upper: upper.max(lower), stride }
}
