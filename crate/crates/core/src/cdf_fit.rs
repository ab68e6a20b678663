//! Antitonic least-squares fit of the whole family of conditional distribution
//! functions.
//!
//! For every threshold `y` the indicator means `F_j(y)` of the groups are
//! projected onto non-increasing vectors in `j`. The projection only changes
//! at observed responses, so the fit is an `m x l` matrix over design points and
//! distinct responses. Every fitted row is a distribution function.
//!
//! Columns are stored run-length encoded: a fitted column is constant on the
//! pooled blocks of its projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isoreg::pava::{pava_into, CountPool};
use crate::order::{DesignGroups, StepCdf};

/// How `x -> F_x(y)` is extended between design points. Outside the design
/// range the nearest end row is used in every mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Linear,
    /// Value of the nearest design point at or left of `x`. This is the upper
    /// extremal antitonic extension.
    StepLeft,
    /// Value of the nearest design point at or right of `x`. This is the lower
    /// extremal antitonic extension.
    StepRight,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Run {
    end: u32,
    value: f64,
}

/// Fitted conditional distribution functions `F_{x_j}(y_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfFamilyFit {
    xs: Vec<f64>,
    weights: Vec<usize>,
    thresholds: Vec<f64>,
    runs: Vec<Run>,
    offsets: Vec<usize>,
    interpolation: Interpolation,
    groups: Option<DesignGroups>,
}

/// Where a covariate value falls relative to the design points: the estimate
/// at `x` is `(1 - t) * row(lo) + t * row(hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowMix {
    pub lo: usize,
    pub hi: usize,
    pub t: f64,
}

/// Fits the family with one pool-adjacent-violators pass per threshold.
///
/// Block levels are exact fractions `count / weight`, so fitted values coincide
/// bit-for-bit with pooled empirical distribution functions.
pub fn fit_cdf_family(groups: &DesignGroups) -> CdfFamilyFit {
    let m = groups.m();
    let mut events: Vec<(f64, u32)> = groups.all_responses().map(|(j, y)| (y, j as u32)).collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let weights: Vec<u64> = groups.weights().iter().map(|&w| w as u64).collect();
    let mut counts = vec![0u64; m];
    let mut thresholds = Vec::new();
    let mut runs = Vec::new();
    let mut offsets = vec![0];
    let mut blocks = Vec::with_capacity(m);

    let mut e = 0;
    while e < events.len() {
        let y = events[e].0;
        while e < events.len() && events[e].0 == y {
            counts[events[e].1 as usize] += 1;
            e += 1;
        }
        thresholds.push(y);
        // antitonic in j == isotonic over reversed indices
        pava_into(
            (0..m).rev().map(|j| CountPool { count: counts[j], weight: weights[j] }),
            &mut blocks,
        );
        let mut end = 0u32;
        for (pool, len) in blocks.iter().rev() {
            end += *len as u32;
            runs.push(Run { end, value: pool.level() });
        }
        offsets.push(runs.len());
    }

    CdfFamilyFit {
        xs: groups.xs().to_vec(),
        weights: groups.weights().to_vec(),
        thresholds,
        runs,
        offsets,
        interpolation: Interpolation::default(),
        groups: Some(groups.clone()),
    }
}

impl CdfFamilyFit {
    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    /// Builds a fit from a dense row-major matrix, checking that columns are
    /// non-increasing, rows non-decreasing, entries in `[0, 1]` and the last
    /// column all ones.
    pub fn from_dense(
        xs: Vec<f64>,
        weights: Vec<usize>,
        thresholds: Vec<f64>,
        values: &[f64],
        interpolation: Interpolation,
    ) -> Result<Self> {
        let m = xs.len();
        let l = thresholds.len();
        if m == 0 || l == 0 {
            return Err(Error::InvalidFit("empty design or threshold set".into()));
        }
        if weights.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: weights.len() });
        }
        if values.len() != m * l {
            return Err(Error::LengthMismatch { expected: m * l, got: values.len() });
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) || thresholds.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidFit("covariates and thresholds must be strictly increasing".into()));
        }
        if weights.contains(&0) {
            return Err(Error::InvalidFit("weights must be positive".into()));
        }
        let at = |j: usize, k: usize| values[j * l + k];
        for j in 0..m {
            for k in 0..l {
                let v = at(j, k);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidFit(format!("value {v} at ({j}, {k}) outside [0, 1]")));
                }
                if k > 0 && v < at(j, k - 1) {
                    return Err(Error::InvalidFit(format!("row {j} decreases at threshold {k}")));
                }
                if j > 0 && v > at(j - 1, k) {
                    return Err(Error::InvalidFit(format!("column {k} increases at row {j}")));
                }
            }
            if at(j, l - 1) != 1.0 {
                return Err(Error::InvalidFit(format!("row {j} does not reach 1")));
            }
        }
        let mut runs = Vec::new();
        let mut offsets = vec![0];
        for k in 0..l {
            for j in 0..m {
                let v = at(j, k);
                match runs[offsets[k]..].last_mut() {
                    Some(Run { end, value }) if *value == v => *end = j as u32 + 1,
                    _ => runs.push(Run { end: j as u32 + 1, value: v }),
                }
            }
            offsets.push(runs.len());
        }
        Ok(Self { xs, weights, thresholds, runs, offsets, interpolation, groups: None })
    }

    pub fn m(&self) -> usize {
        self.xs.len()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// The grouped data the fit came from; `None` for fits loaded from JSON.
    pub fn groups(&self) -> Option<&DesignGroups> {
        self.groups.as_ref()
    }

    fn column_runs_raw(&self, k: usize) -> &[Run] {
        &self.runs[self.offsets[k]..self.offsets[k + 1]]
    }

    /// `(start, end, value)` for each constant block of column `k`.
    pub fn column_runs(&self, k: usize) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let runs = self.column_runs_raw(k);
        runs.iter().enumerate().map(move |(i, r)| {
            let start = if i == 0 { 0 } else { runs[i - 1].end as usize };
            (start, r.end as usize, r.value)
        })
    }

    /// Total number of constant blocks over all columns.
    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    /// Fitted value at design point `j`, threshold `k`.
    pub fn value(&self, j: usize, k: usize) -> f64 {
        let runs = self.column_runs_raw(k);
        runs[runs.partition_point(|r| r.end as usize <= j)].value
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.m());
        for (s, e, v) in self.column_runs(k) {
            out.extend(std::iter::repeat_n(v, e - s));
        }
        out
    }

    pub fn row(&self, j: usize) -> Vec<f64> {
        (0..self.thresholds.len()).map(|k| self.value(j, k)).collect()
    }

    /// Row `j` as a step distribution function.
    pub fn row_cdf(&self, j: usize) -> StepCdf {
        StepCdf::from_levels(&self.thresholds, &self.row(j)).expect("fitted rows are distribution functions")
    }

    /// Row-major `m x l` matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let l = self.thresholds.len();
        let mut out = vec![0.0; self.m() * l];
        for k in 0..l {
            for (s, e, v) in self.column_runs(k) {
                for j in s..e {
                    out[j * l + k] = v;
                }
            }
        }
        out
    }

    /// Index of the column in force at `y`, or `None` below the first threshold.
    pub fn threshold_index(&self, y: f64) -> Option<usize> {
        self.thresholds.partition_point(|&t| t <= y).checked_sub(1)
    }

    /// Rows and weight that make up the estimate at covariate `x`.
    pub fn row_mix(&self, x: f64) -> RowMix {
        let m = self.m();
        let hi = self.xs.partition_point(|&v| v < x);
        if hi == 0 {
            return RowMix { lo: 0, hi: 0, t: 0.0 };
        }
        if hi == m {
            return RowMix { lo: m - 1, hi: m - 1, t: 0.0 };
        }
        if self.xs[hi] == x {
            return RowMix { lo: hi, hi, t: 0.0 };
        }
        let lo = hi - 1;
        match self.interpolation {
            Interpolation::Linear => {
                RowMix { lo, hi, t: (x - self.xs[lo]) / (self.xs[hi] - self.xs[lo]) }
            }
            Interpolation::StepLeft => RowMix { lo, hi: lo, t: 0.0 },
            Interpolation::StepRight => RowMix { lo: hi, hi, t: 0.0 },
        }
    }

    /// `F_x(y)` with the fit's interpolation mode.
    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64> {
        if x.is_nan() || y.is_nan() {
            return Err(Error::NonFinite("evaluation point"));
        }
        let Some(k) = self.threshold_index(y) else {
            return Ok(0.0);
        };
        let mix = self.row_mix(x);
        let lo = self.value(mix.lo, k);
        if mix.t == 0.0 {
            return Ok(lo);
        }
        let hi = self.value(mix.hi, k);
        Ok((1.0 - mix.t) * lo + mix.t * hi)
    }

    /// The fitted distribution function at `x` as a step function in `y`.
    pub fn cdf_at(&self, x: f64) -> StepCdf {
        let mix = self.row_mix(x);
        let lo = self.row(mix.lo);
        if mix.t == 0.0 {
            return StepCdf::from_levels(&self.thresholds, &lo).expect("fitted rows are distribution functions");
        }
        let hi = self.row(mix.hi);
        let mixed: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| ((1.0 - mix.t) * a + mix.t * b).min(1.0)).collect();
        let mut mixed = mixed;
        // a convex combination of two rows ending at 1 ends at 1
        *mixed.last_mut().unwrap() = 1.0;
        StepCdf::from_levels(&self.thresholds, &mixed).expect("mixture of distribution functions")
    }

    /// Largest amount by which any column increases in `j` (zero for a valid fit).
    pub fn max_column_violation(&self) -> f64 {
        (0..self.thresholds.len())
            .flat_map(|k| {
                let runs = self.column_runs_raw(k);
                runs.windows(2).map(|w| (w[1].value - w[0].value).max(0.0)).collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }

    fn pooled_counts(&self, k: usize) -> Result<(Vec<u64>, Vec<u64>)> {
        let groups = self
            .groups
            .as_ref()
            .ok_or_else(|| Error::InvalidFit("min-max check needs the grouped data".into()))?;
        if k >= self.thresholds.len() {
            return Err(Error::IndexOutOfRange { index: k, len: self.thresholds.len() });
        }
        let y = self.thresholds[k];
        let mut c = vec![0u64];
        let mut w = vec![0u64];
        for j in 0..groups.m() {
            let below = groups.responses(j).partition_point(|&v| v <= y) as u64;
            c.push(c[j] + below);
            w.push(w[j] + groups.weights()[j] as u64);
        }
        Ok((c, w))
    }

    /// `min_{r<=j} max_{s>=j} F_rs(y_k)` evaluated directly from pooled counts.
    pub fn minmax_verify(&self, j: usize, k: usize) -> Result<f64> {
        let (c, w) = self.pooled_counts(k)?;
        let m = self.m();
        if j >= m {
            return Err(Error::IndexOutOfRange { index: j, len: m });
        }
        let pooled = |r: usize, s: usize| (c[s + 1] - c[r]) as f64 / (w[s + 1] - w[r]) as f64;
        Ok((0..=j)
            .map(|r| (j..m).map(|s| pooled(r, s)).fold(f64::NEG_INFINITY, f64::max))
            .fold(f64::INFINITY, f64::min))
    }

    /// `max_{s>=j} min_{r<=j} F_rs(y_k)`.
    pub fn maxmin_verify(&self, j: usize, k: usize) -> Result<f64> {
        let (c, w) = self.pooled_counts(k)?;
        let m = self.m();
        if j >= m {
            return Err(Error::IndexOutOfRange { index: j, len: m });
        }
        let pooled = |r: usize, s: usize| (c[s + 1] - c[r]) as f64 / (w[s + 1] - w[r]) as f64;
        Ok((j..m)
            .map(|s| (0..=j).map(|r| pooled(r, s)).fold(f64::INFINITY, f64::min))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn to_json(&self) -> String {
        let doc = FitDocument {
            xs: self.xs.clone(),
            weights: self.weights.clone(),
            thresholds: self.thresholds.clone(),
            values: self.to_dense(),
            interpolation: self.interpolation,
        };
        serde_json::to_string(&doc).expect("fit serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: FitDocument = serde_json::from_str(s)?;
        Self::from_dense(doc.xs, doc.weights, doc.thresholds, &doc.values, doc.interpolation)
    }
}

/// `evaluate_cdf(fit, x, y)`.
pub fn evaluate_cdf(fit: &CdfFamilyFit, x: f64, y: f64) -> Result<f64> {
    fit.evaluate(x, y)
}

/// `minmax_verify(fit, j, k)`.
pub fn minmax_verify(fit: &CdfFamilyFit, j: usize, k: usize) -> Result<f64> {
    fit.minmax_verify(j, k)
}

#[derive(Serialize, Deserialize)]
struct FitDocument {
    #[serde(serialize_with = "crate::json::vec_f64_17")]
    xs: Vec<f64>,
    weights: Vec<usize>,
    #[serde(serialize_with = "crate::json::vec_f64_17")]
    thresholds: Vec<f64>,
    #[serde(serialize_with = "crate::json::vec_f64_17")]
    values: Vec<f64>,
    interpolation: Interpolation,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isoreg::pava_antitonic_ls;

    fn groups(x: &[f64], y: &[f64]) -> DesignGroups {
        DesignGroups::from_pairs(x, y).unwrap()
    }

    #[test]
    fn single_group_is_empirical_cdf() {
        let g = groups(&[1.0; 4], &[3.0, 1.0, 2.0, 2.0]);
        let fit = fit_cdf_family(&g);
        assert_eq!(fit.thresholds(), &[1.0, 2.0, 3.0]);
        assert_eq!(fit.row(0), vec![0.25, 0.75, 1.0]);
        assert_eq!(fit.minmax_verify(0, 1).unwrap(), 0.75);
    }

    #[test]
    fn ordered_groups_unchanged() {
        let g = groups(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]);
        let fit = fit_cdf_family(&g);
        assert_eq!(fit.to_dense(), vec![1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn two_point_counterexample_pools() {
        let g = groups(&[0.0, 1.0], &[1.0, 0.0]);
        let fit = fit_cdf_family(&g);
        // threshold 0: raw targets (0, 1) pool to (0.5, 0.5)
        assert_eq!(fit.column(0), vec![0.5, 0.5]);
        assert_eq!(fit.column(1), vec![1.0, 1.0]);
    }

    #[test]
    fn columns_match_float_pava() {
        let g = groups(
            &[0.0, 0.0, 1.0, 2.0, 2.0, 2.0, 3.0, 4.0],
            &[2.0, 5.0, 1.0, 4.0, 0.5, 3.0, 1.5, 0.0],
        );
        let fit = fit_cdf_family(&g);
        let w: Vec<f64> = g.weights().iter().map(|&w| w as f64).collect();
        for (k, &y) in fit.thresholds().iter().enumerate() {
            let targets: Vec<f64> =
                (0..g.m()).map(|j| g.empirical_cdf(j).unwrap().eval(y)).collect();
            let want = pava_antitonic_ls(&targets, &w).unwrap();
            for (a, b) in fit.column(k).iter().zip(&want) {
                assert!((a - b).abs() <= 1e-12);
            }
            for j in 0..g.m() {
                assert_eq!(fit.value(j, k), fit.minmax_verify(j, k).unwrap());
                assert_eq!(fit.value(j, k), fit.maxmin_verify(j, k).unwrap());
            }
        }
    }

    #[test]
    fn evaluation_modes() {
        let g = groups(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]);
        let fit = fit_cdf_family(&g);
        assert_eq!(fit.evaluate(0.5, 0.0).unwrap(), 0.5);
        assert_eq!(fit.evaluate(-3.0, 0.0).unwrap(), 1.0);
        assert_eq!(fit.evaluate(9.0, 0.0).unwrap(), 0.0);
        assert_eq!(fit.evaluate(1.0, 1.5).unwrap(), 1.0);
        assert_eq!(fit.evaluate(1.0, -1.0).unwrap(), 0.0);
        let left = fit.clone().with_interpolation(Interpolation::StepLeft);
        let right = fit.clone().with_interpolation(Interpolation::StepRight);
        assert_eq!(left.evaluate(0.5, 0.0).unwrap(), 1.0);
        assert_eq!(right.evaluate(0.5, 0.0).unwrap(), 0.0);
        assert!(fit.evaluate(f64::NAN, 0.0).is_err());
        assert!(fit.evaluate(0.0, f64::NAN).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let g = groups(&[0.0, 0.0, 0.0, 1.0, 2.0, 2.0], &[0.3, 1.1, 0.2, 0.7, 0.1, 0.9]);
        let fit = fit_cdf_family(&g).with_interpolation(Interpolation::StepRight);
        let back = CdfFamilyFit::from_json(&fit.to_json()).unwrap();
        assert_eq!(back.to_dense(), fit.to_dense());
        assert_eq!(back.thresholds(), fit.thresholds());
        assert_eq!(back.interpolation(), Interpolation::StepRight);
        assert!(back.groups().is_none());
        assert!(back.minmax_verify(0, 0).is_err());
    }

    #[test]
    fn from_dense_rejects_invalid() {
        let ok = CdfFamilyFit::from_dense(vec![0.0, 1.0], vec![1, 1], vec![0.0, 1.0], &[0.5, 1.0, 0.5, 1.0], Interpolation::Linear);
        assert!(ok.is_ok());
        let increasing_col =
            CdfFamilyFit::from_dense(vec![0.0, 1.0], vec![1, 1], vec![0.0, 1.0], &[0.2, 1.0, 0.5, 1.0], Interpolation::Linear);
        assert!(matches!(increasing_col, Err(Error::InvalidFit(_))));
        let not_one =
            CdfFamilyFit::from_dense(vec![0.0], vec![1], vec![0.0, 1.0], &[0.2, 0.9], Interpolation::Linear);
        assert!(matches!(not_one, Err(Error::InvalidFit(_))));
    }
}
