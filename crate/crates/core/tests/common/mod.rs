//! Independent reference computations shared by the integration tests. Nothing
//! here calls into the library's own solvers.
#![allow(dead_code)]

use isodist::DesignGroups;
use proptest::prelude::*;

/// Weighted least-squares antitonic fit by brute force over all partitions into
/// consecutive blocks; blocks take their weighted means and must be non-increasing.
pub fn antitonic_by_partitions(t: &[f64], w: &[f64]) -> Vec<f64> {
    let m = t.len();
    let mut best_sse = f64::INFINITY;
    let mut best = vec![];
    for mask in 0u64..(1u64 << (m - 1)) {
        let mut bounds = vec![0];
        for i in 1..m {
            if mask >> (i - 1) & 1 == 1 {
                bounds.push(i);
            }
        }
        bounds.push(m);
        let means: Vec<f64> = bounds
            .windows(2)
            .map(|b| {
                let sw: f64 = w[b[0]..b[1]].iter().sum();
                let sy: f64 = (b[0]..b[1]).map(|i| w[i] * t[i]).sum();
                sy / sw
            })
            .collect();
        if means.windows(2).any(|p| p[1] > p[0]) {
            continue;
        }
        let mut fit = vec![0.0; m];
        for (blk, b) in bounds.windows(2).enumerate() {
            fit[b[0]..b[1]].iter_mut().for_each(|v| *v = means[blk]);
        }
        let sse: f64 = (0..m).map(|i| w[i] * (t[i] - fit[i]) * (t[i] - fit[i])).sum();
        if sse < best_sse {
            best_sse = sse;
            best = fit;
        }
    }
    best
}

/// `min_{r<=j} max_{s>=j}` of weighted block means, straight from the definition.
pub fn antitonic_minmax(t: &[f64], w: &[f64]) -> Vec<f64> {
    let m = t.len();
    let mut out = vec![0.0; m];
    for j in 0..m {
        let mut best = f64::INFINITY;
        for r in 0..=j {
            let mut worst = f64::NEG_INFINITY;
            for s in j..m {
                let sw: f64 = w[r..=s].iter().sum();
                let sy: f64 = (r..=s).map(|i| w[i] * t[i]).sum();
                worst = worst.max(sy / sw);
            }
            best = best.min(worst);
        }
        out[j] = best;
    }
    out
}

/// `max_{s>=j} min_{r<=j}` of weighted block means.
pub fn antitonic_maxmin(t: &[f64], w: &[f64]) -> Vec<f64> {
    let m = t.len();
    (0..m)
        .map(|j| {
            (j..m)
                .map(|s| {
                    (0..=j)
                        .map(|r| {
                            let sw: f64 = w[r..=s].iter().sum();
                            (r..=s).map(|i| w[i] * t[i]).sum::<f64>() / sw
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

pub fn rho(beta: f64, z: f64) -> f64 {
    if z < 0.0 {
        (beta - 1.0) * z
    } else {
        beta * z
    }
}

/// Distinct covariates of raw pairs, ascending.
pub fn distinct_xs(data: &[(f64, f64)]) -> Vec<f64> {
    let mut xs: Vec<f64> = data.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Pinball risk computed from raw pairs, `q` indexed by distinct covariate.
pub fn risk_raw(data: &[(f64, f64)], q: &[f64], beta: f64) -> f64 {
    let xs = distinct_xs(data);
    data.iter()
        .map(|&(x, y)| {
            let j = xs.iter().position(|&v| v == x).unwrap();
            rho(beta, y - q[j])
        })
        .sum()
}

/// All non-decreasing vectors over `grid` attaining the least pinball risk
/// (relative tolerance 1e-10), with that risk.
pub fn pinball_grid_minimizers(data: &[(f64, f64)], beta: f64, grid: &[f64]) -> (f64, Vec<Vec<f64>>) {
    let m = distinct_xs(data).len();
    let mut all = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(grid: &[f64], start: usize, m: usize, cur: &mut Vec<f64>, all: &mut Vec<Vec<f64>>) {
        if cur.len() == m {
            all.push(cur.clone());
            return;
        }
        for k in start..grid.len() {
            cur.push(grid[k]);
            rec(grid, k, m, cur, all);
            cur.pop();
        }
    }
    rec(grid, 0, m, &mut cur, &mut all);
    let risks: Vec<f64> = all.iter().map(|q| risk_raw(data, q, beta)).collect();
    let best = risks.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-10 * best.abs().max(1.0);
    let mins = all.into_iter().zip(risks).filter(|(_, r)| *r <= best + tol).map(|(q, _)| q).collect();
    (best, mins)
}

/// Responses and their midpoints, sorted and deduplicated.
pub fn response_grid(data: &[(f64, f64)]) -> Vec<f64> {
    let mut v: Vec<f64> = data.iter().map(|p| p.1).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mids: Vec<f64> = v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    v.extend(mids);
    v.sort_by(f64::total_cmp);
    v
}

/// Empirical CDF of a multiset at `y` as an exact fraction `(count, total)`.
pub fn ecdf_count(sample: &[f64], y: f64) -> (u64, u64) {
    (sample.iter().filter(|&&v| v <= y).count() as u64, sample.len() as u64)
}

/// Minimal and maximal `beta`-quantile of a sample by scanning candidates.
pub fn sample_quantiles(sample: &[f64], beta: f64) -> (f64, f64) {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let f = |y: f64| s.iter().filter(|&&v| v <= y).count() as f64 / n;
    let lo = *s.iter().find(|&&y| f(y) >= beta).unwrap();
    let hi = *s.iter().find(|&&y| f(y) > beta).unwrap();
    (lo, hi)
}

pub fn groups(data: &[(f64, f64)]) -> DesignGroups {
    let (xs, ys): (Vec<f64>, Vec<f64>) = data.iter().copied().unzip();
    DesignGroups::from_pairs(&xs, &ys).unwrap()
}

/// Raw pairs with covariates in `0..max_m` and integer responses in `0..levels`.
pub fn small_data(max_m: usize, max_n: usize, levels: u32) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0..max_m as u32, 0..levels), 1..=max_n)
        .prop_map(|v| v.into_iter().map(|(x, y)| (x as f64, y as f64)).collect())
}

/// Raw pairs with real responses, so ties in `y` are rare.
pub fn real_data(max_m: usize, max_n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0..max_m as u32, -5.0f64..5.0), 1..=max_n)
        .prop_map(|v| v.into_iter().map(|(x, y)| (x as f64 * 0.5, y)).collect())
}

pub fn beta_tenths() -> impl Strategy<Value = f64> {
    (1u32..=9).prop_map(|k| k as f64 / 10.0)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
