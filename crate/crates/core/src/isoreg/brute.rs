//! Exhaustive grid search over isotonic vectors, used as an independent oracle
//! for small problems.

use super::band::SolutionBand;
use crate::error::{Error, Result};

/// An explicit convex loss attached to one index.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexLoss {
    /// `sum_i rho_beta(y_i - q)`
    Pinball { beta: f64, responses: Vec<f64> },
    /// `weight * (q - center)^2`
    Quadratic { weight: f64, center: f64 },
}

impl IndexLoss {
    pub fn eval(&self, q: f64) -> f64 {
        match self {
            IndexLoss::Pinball { beta, responses } => responses.iter().map(|&y| pinball(*beta, y - q)).sum(),
            IndexLoss::Quadratic { weight, center } => weight * (q - center) * (q - center),
        }
    }
}

/// `rho_beta(z) = (beta - 1{z < 0}) z`
pub fn pinball(beta: f64, z: f64) -> f64 {
    if z < 0.0 {
        (beta - 1.0) * z
    } else {
        beta * z
    }
}

#[derive(Debug, Clone)]
pub struct BruteForce {
    pub band: SolutionBand,
    pub min_loss: f64,
    /// Every grid vector attaining the minimum (relative tolerance 1e-10).
    pub minimizers: Vec<Vec<f64>>,
}

pub const DEFAULT_GRID_CAP: u128 = 2_000_000;

fn multiset_count(g: usize, m: usize) -> u128 {
    // C(g + m - 1, m)
    let mut c: u128 = 1;
    for i in 0..m as u128 {
        c = c * (g as u128 + i) / (i + 1);
    }
    c
}

/// Enumerates every non-decreasing vector with components in `grid`, and
/// returns the componentwise min and max over the set of global minimizers.
pub fn brute_force_band(losses: &[IndexLoss], grid: &[f64], cap: u128) -> Result<BruteForce> {
    let m = losses.len();
    if m == 0 || grid.is_empty() {
        return Err(Error::InsufficientData("empty loss list or grid".into()));
    }
    let mut grid: Vec<f64> = grid.to_vec();
    if grid.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("grid"));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let count = multiset_count(grid.len(), m);
    if count > cap {
        return Err(Error::GridTooLarge { count, cap });
    }

    // loss table: value of loss j at grid point k
    let table: Vec<Vec<f64>> = losses.iter().map(|l| grid.iter().map(|&q| l.eval(q)).collect()).collect();

    let mut idx = vec![0usize; m];
    let mut scored: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut best = f64::INFINITY;
    loop {
        let total: f64 = idx.iter().enumerate().map(|(j, &k)| table[j][k]).sum();
        if total <= best + 1e-10 * best.abs().max(1.0) {
            best = best.min(total);
            scored.push((total, idx.clone()));
        }
        // next non-decreasing index vector
        let mut pos = m;
        while pos > 0 && idx[pos - 1] == grid.len() - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        let v = idx[pos - 1] + 1;
        idx[pos - 1..].iter_mut().for_each(|k| *k = v);
    }

    let tol = 1e-10 * best.abs().max(1.0);
    let minimizers: Vec<Vec<f64>> = scored
        .into_iter()
        .filter(|(t, _)| *t <= best + tol)
        .map(|(_, ix)| ix.iter().map(|&k| grid[k]).collect())
        .collect();
    let mut lower = vec![f64::INFINITY; m];
    let mut upper = vec![f64::NEG_INFINITY; m];
    for q in &minimizers {
        for j in 0..m {
            lower[j] = lower[j].min(q[j]);
            upper[j] = upper[j].max(q[j]);
        }
    }
    Ok(BruteForce { band: SolutionBand { lower, upper }, min_loss: best, minimizers })
}
