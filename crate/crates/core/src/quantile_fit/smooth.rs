//! Piecewise-linear curve of least Dirichlet energy inside a quantile band.
//!
//! Minimizes `sum_j (q_{j+1} - q_j)^2 / (x_{j+1} - x_j)`, which is the integral
//! of `q'^2` for the linear interpolant, subject to `lower_j <= q_j <= upper_j`.

use serde::{Deserialize, Serialize};

use super::QuantileBand;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100_000;
const SWEEP_CHUNK: usize = 64;
const UPDATE_TOL: f64 = 1e-12;
const STATIONARITY_TOL: f64 = 1e-10;

/// Knot values of a piecewise-linear curve; constant beyond the end knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothCurve {
    #[serde(serialize_with = "crate::json::vec_f64_17")]
    pub xs: Vec<f64>,
    #[serde(serialize_with = "crate::json::vec_f64_17")]
    pub knots: Vec<f64>,
}

impl SmoothCurve {
    pub fn eval(&self, x: f64) -> f64 {
        let m = self.xs.len();
        let hi = self.xs.partition_point(|&v| v < x);
        if hi == 0 {
            return self.knots[0];
        }
        if hi == m {
            return self.knots[m - 1];
        }
        let lo = hi - 1;
        let t = (x - self.xs[lo]) / (self.xs[hi] - self.xs[lo]);
        self.knots[lo] + t * (self.knots[hi] - self.knots[lo])
    }

    pub fn energy(&self) -> f64 {
        energy(&self.xs, &self.knots)
    }

    /// Largest projected-gradient component with respect to the box
    /// `[lower, upper]`; zero at the constrained minimizer.
    pub fn stationarity(&self, lower: &[f64], upper: &[f64]) -> f64 {
        let inv_h = inverse_gaps(&self.xs);
        let g = gradient(&inv_h, &self.knots);
        let scale = gradient_scale(&inv_h, &self.knots);
        (0..self.knots.len())
            .map(|j| {
                let q = self.knots[j];
                (q - (q - g[j]).clamp(lower[j], upper[j])).abs() / scale
            })
            .fold(0.0, f64::max)
    }
}

fn energy(xs: &[f64], q: &[f64]) -> f64 {
    (0..q.len().saturating_sub(1))
        .map(|j| (q[j + 1] - q[j]).powi(2) / (xs[j + 1] - xs[j]))
        .sum()
}

fn inverse_gaps(xs: &[f64]) -> Vec<f64> {
    xs.windows(2).map(|w| 1.0 / (w[1] - w[0])).collect()
}

fn gradient(inv_h: &[f64], q: &[f64]) -> Vec<f64> {
    let m = q.len();
    (0..m)
        .map(|j| {
            let left = if j > 0 { (q[j] - q[j - 1]) * inv_h[j - 1] } else { 0.0 };
            let right = if j + 1 < m { (q[j + 1] - q[j]) * inv_h[j] } else { 0.0 };
            2.0 * (left - right)
        })
        .collect()
}

fn gradient_scale(inv_h: &[f64], q: &[f64]) -> f64 {
    let qmax = q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let hmax = inv_h.iter().fold(0.0f64, |a, &v| a.max(v));
    (1.0 + qmax) * hmax.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Bound {
    Free,
    Lower,
    Upper,
}

/// Smooth isotonic curve through a quantile band, evaluated at the band's
/// design points.
pub fn smooth_band_curve(band: &QuantileBand) -> Result<SmoothCurve> {
    smooth_box_curve(&band.lower, &band.upper, &band.xs)
}

/// Minimizes the Dirichlet energy of the linear interpolant over the box
/// `lower <= q <= upper`.
///
/// Cyclic coordinate minimization: each knot moves to the energy-weighted
/// average of its neighbours, clipped to its box. Every few sweeps the active
/// bounds of the iterate are used to build the exact candidate (linear between
/// active knots, flat beyond the outermost ones); once that candidate passes the
/// KKT conditions it is returned.
pub fn smooth_box_curve(lower: &[f64], upper: &[f64], xs: &[f64]) -> Result<SmoothCurve> {
    let m = xs.len();
    if m == 0 {
        return Err(Error::InsufficientData("empty band".into()));
    }
    for len in [lower.len(), upper.len()] {
        if len != m {
            return Err(Error::LengthMismatch { expected: m, got: len });
        }
    }
    if xs.iter().chain(lower).chain(upper).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("band"));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition("design points must be strictly increasing".into()));
    }
    if let Some(j) = (0..m).find(|&j| lower[j] > upper[j]) {
        return Err(Error::InfeasibleBand(j));
    }

    let inv_h = inverse_gaps(xs);
    let mut q: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect();
    let mut result = None;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS && result.is_none() {
        let mut max_step: f64 = 0.0;
        for _ in 0..SWEEP_CHUNK {
            max_step = sweep(&mut q, &inv_h, lower, upper);
            sweeps += 1;
            if max_step < UPDATE_TOL {
                break;
            }
        }
        result = polish(&q, &inv_h, lower, upper, xs);
        if max_step < UPDATE_TOL {
            break;
        }
    }
    let knots = result.unwrap_or(q);

    if let Some(j) = (0..m.saturating_sub(1)).find(|&j| knots[j + 1] < knots[j] - 1e-12) {
        return Err(Error::NotMonotone(j));
    }
    Ok(SmoothCurve { xs: xs.to_vec(), knots })
}

fn sweep(q: &mut [f64], inv_h: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    let m = q.len();
    let mut max_step: f64 = 0.0;
    for j in 0..m {
        let (mut num, mut den) = (0.0, 0.0);
        if j > 0 {
            num += inv_h[j - 1] * q[j - 1];
            den += inv_h[j - 1];
        }
        if j + 1 < m {
            num += inv_h[j] * q[j + 1];
            den += inv_h[j];
        }
        if den == 0.0 {
            continue;
        }
        let new = (num / den).clamp(lower[j], upper[j]);
        max_step = max_step.max((new - q[j]).abs());
        q[j] = new;
    }
    max_step
}

/// Exact minimizer for a guessed active set, refined by adding violated bounds
/// and releasing bounds with the wrong multiplier sign.
fn polish(q: &[f64], inv_h: &[f64], lower: &[f64], upper: &[f64], xs: &[f64]) -> Option<Vec<f64>> {
    let m = q.len();
    let mut active: Vec<Bound> = (0..m)
        .map(|j| {
            if q[j] <= lower[j] {
                Bound::Lower
            } else if q[j] >= upper[j] {
                Bound::Upper
            } else {
                Bound::Free
            }
        })
        .collect();

    for _ in 0..64 {
        let p = reconstruct(&active, lower, upper, xs)?;
        let g = gradient(inv_h, &p);
        let tol = STATIONARITY_TOL * gradient_scale(inv_h, &p);
        let mut changed = false;
        for j in 0..m {
            match active[j] {
                Bound::Free if p[j] < lower[j] => {
                    active[j] = Bound::Lower;
                    changed = true;
                }
                Bound::Free if p[j] > upper[j] => {
                    active[j] = Bound::Upper;
                    changed = true;
                }
                Bound::Lower if lower[j] < upper[j] && g[j] < -tol => {
                    active[j] = Bound::Free;
                    changed = true;
                }
                Bound::Upper if lower[j] < upper[j] && g[j] > tol => {
                    active[j] = Bound::Free;
                    changed = true;
                }
                Bound::Free if g[j].abs() > tol => return None,
                _ => {}
            }
        }
        if !changed {
            return Some(p);
        }
    }
    None
}

fn reconstruct(active: &[Bound], lower: &[f64], upper: &[f64], xs: &[f64]) -> Option<Vec<f64>> {
    let m = active.len();
    let fixed: Vec<(usize, f64)> = (0..m)
        .filter_map(|j| match active[j] {
            Bound::Lower => Some((j, lower[j])),
            Bound::Upper => Some((j, upper[j])),
            Bound::Free => None,
        })
        .collect();
    let mut p = vec![0.0; m];
    let Some(&(first, first_v)) = fixed.first() else {
        // zero energy: any constant inside every box
        let lo = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let hi = upper.iter().copied().fold(f64::INFINITY, f64::min);
        return (lo <= hi).then(|| vec![0.5 * (lo + hi); m]);
    };
    p[..=first].fill(first_v);
    for w in fixed.windows(2) {
        let ((a, va), (b, vb)) = (w[0], w[1]);
        for j in a..=b {
            let t = (xs[j] - xs[a]) / (xs[b] - xs[a]);
            p[j] = va + t * (vb - va);
        }
    }
    let &(last, last_v) = fixed.last().unwrap();
    p[last..].fill(last_v);
    Some(p)
}
