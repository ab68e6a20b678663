//! Min-max characterization of the solution set of isotonic regression with
//! general convex losses.
//!
//! For losses `R_1, ..., R_m` let `[L_ab, U_ab]` be the set of minimizers of
//! `R_a + ... + R_b`. The componentwise smallest and largest isotonic
//! minimizers of `sum_j R_j(x_j)` are
//!
//! ```text
//! l_j = max_{a<=j} min_{b>=j} L_ab = min_{b>=j} max_{a<=j} L_ab
//! u_j = min_{b>=j} max_{a<=j} U_ab = max_{a<=j} min_{b>=j} U_ab
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimizer intervals of pooled losses over index intervals `a..=b`.
///
/// Implementations must be safe to call concurrently. The bulk methods exist so
/// oracles with incremental structure can fill a whole row or column faster
/// than `m` independent calls.
pub trait LossOracle {
    fn len(&self) -> usize;

    /// `(L_ab, U_ab)` for `a <= b < len()`.
    fn interval_minimizers(&self, a: usize, b: usize) -> (f64, f64);

    /// Absolute tolerance for comparisons between minimizers.
    fn tolerance(&self) -> f64 {
        0.0
    }

    /// `out[b - a] = (L_ab, U_ab)` for `b` in `a..len()`.
    fn row(&self, a: usize, out: &mut Vec<(f64, f64)>) {
        out.clear();
        out.extend((a..self.len()).map(|b| self.interval_minimizers(a, b)));
    }

    /// `out[a] = (L_ab, U_ab)` for `a` in `0..=b`.
    fn column(&self, b: usize, out: &mut Vec<(f64, f64)>) {
        out.clear();
        out.extend((0..=b).map(|a| self.interval_minimizers(a, b)));
    }
}

/// Componentwise bounds `lower <= x <= upper` of every isotonic minimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionBand {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SolutionBand {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    /// Indices `j` with `lower_j < lower_{j+1}` or `upper_j < upper_{j+1}`.
    pub fn increase_positions(&self) -> Vec<usize> {
        (0..self.len().saturating_sub(1))
            .filter(|&j| self.lower[j] < self.lower[j + 1] || self.upper[j] < self.upper[j + 1])
            .collect()
    }
}

/// Both orders of each min-max formula, for consistency checks.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxOrders {
    /// `max_a min_b L_ab`
    pub lower_maxmin: Vec<f64>,
    /// `min_b max_a L_ab`
    pub lower_minmax: Vec<f64>,
    /// `min_b max_a U_ab`
    pub upper_minmax: Vec<f64>,
    /// `max_a min_b U_ab`
    pub upper_maxmin: Vec<f64>,
}

/// Evaluates both orders of the min-max formulae with `O(m^2)` oracle values.
pub fn minmax_orders<O: LossOracle + ?Sized>(oracle: &O) -> MinMaxOrders {
    let m = oracle.len();
    let mut lower_maxmin = vec![f64::NEG_INFINITY; m];
    let mut upper_maxmin = vec![f64::NEG_INFINITY; m];
    let mut lower_minmax = vec![f64::INFINITY; m];
    let mut upper_minmax = vec![f64::INFINITY; m];
    let mut buf = Vec::with_capacity(m);

    // max over a of suffix minima over b
    for a in 0..m {
        oracle.row(a, &mut buf);
        let (mut lo, mut up) = (f64::INFINITY, f64::INFINITY);
        for b in (a..m).rev() {
            let (l, u) = buf[b - a];
            lo = lo.min(l);
            up = up.min(u);
            lower_maxmin[b] = lower_maxmin[b].max(lo);
            upper_maxmin[b] = upper_maxmin[b].max(up);
        }
    }
    // min over b of prefix maxima over a
    for b in 0..m {
        oracle.column(b, &mut buf);
        let (mut lo, mut up) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for a in 0..=b {
            let (l, u) = buf[a];
            lo = lo.max(l);
            up = up.max(u);
            lower_minmax[a] = lower_minmax[a].min(lo);
            upper_minmax[a] = upper_minmax[a].min(up);
        }
    }
    MinMaxOrders { lower_maxmin, lower_minmax, upper_minmax, upper_maxmin }
}

/// Smallest and largest isotonic minimizers via the min-max formulae.
///
/// Both evaluation orders are computed and must agree within the oracle's
/// tolerance; disagreement means the oracle violates the mean-value property.
/// The generic path is meant for `m` up to a few hundred unless the oracle
/// overrides `row`/`column` with something faster than per-cell calls.
pub fn minmax_band<O: LossOracle + ?Sized>(oracle: &O) -> Result<SolutionBand> {
    let orders = minmax_orders(oracle);
    let tol = oracle.tolerance();
    let pairs = [
        (&orders.lower_maxmin, &orders.lower_minmax),
        (&orders.upper_maxmin, &orders.upper_minmax),
    ];
    for (maxmin, minmax) in pairs {
        for (j, (&x, &y)) in maxmin.iter().zip(minmax.iter()).enumerate() {
            if (x - y).abs() > tol {
                return Err(Error::OracleInconsistent { index: j, maxmin: x, minmax: y });
            }
        }
    }
    Ok(SolutionBand { lower: orders.lower_maxmin, upper: orders.upper_minmax })
}

/// Characterization of isotonic minimizers: for all `a <= b`,
/// `x_a <= U_ab` whenever `x_{a-1} < x_a`, and `x_b >= L_ab` whenever
/// `x_b < x_{b+1}` (with `x_{-1} = -inf`, `x_m = +inf`).
///
/// Returns `false` for vectors that are not non-decreasing.
pub fn check_membership<O: LossOracle + ?Sized>(oracle: &O, x: &[f64]) -> Result<bool> {
    let m = oracle.len();
    if x.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: x.len() });
    }
    if x.windows(2).any(|w| !(w[0] <= w[1])) {
        return Ok(false);
    }
    let tol = oracle.tolerance();
    let mut buf = Vec::with_capacity(m);
    for a in 0..m {
        if a == 0 || x[a - 1] < x[a] {
            oracle.row(a, &mut buf);
            if buf.iter().any(|&(_, u)| x[a] > u + tol) {
                return Ok(false);
            }
        }
    }
    for b in 0..m {
        if b + 1 == m || x[b] < x[b + 1] {
            oracle.column(b, &mut buf);
            if buf.iter().any(|&(l, _)| x[b] < l - tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Table(Vec<Vec<(f64, f64)>>);

    impl LossOracle for Table {
        fn len(&self) -> usize {
            self.0.len()
        }
        fn interval_minimizers(&self, a: usize, b: usize) -> (f64, f64) {
            self.0[a][b]
        }
    }

    #[test]
    fn single_index_band() {
        let t = Table(vec![vec![(1.5, 2.5)]]);
        let band = minmax_band(&t).unwrap();
        assert_eq!(band.lower, vec![1.5]);
        assert_eq!(band.upper, vec![2.5]);
        assert!(check_membership(&t, &[2.0]).unwrap());
        assert!(!check_membership(&t, &[3.0]).unwrap());
    }

    #[test]
    fn broken_oracle_is_reported() {
        // row a holds (L_ab, U_ab) for b = 0..3; cells with b < a are unused
        let c = |v: f64| (v, v);
        let t = Table(vec![
            vec![c(0.0), c(0.0), c(10.0)],
            vec![c(0.0), c(10.0), c(0.0)],
            vec![c(0.0), c(0.0), c(0.0)],
        ]);
        assert!(matches!(minmax_band(&t), Err(Error::OracleInconsistent { .. })));
    }

    #[test]
    fn membership_rejects_decreasing() {
        let t = Table(vec![vec![(0.0, 1.0), (0.0, 1.0)], vec![(0.0, 1.0), (0.0, 1.0)]]);
        assert!(!check_membership(&t, &[0.5, 0.4]).unwrap());
        assert!(matches!(check_membership(&t, &[0.5]), Err(Error::LengthMismatch { .. })));
    }
}
