//! Grouped observations, empirical and pooled distribution functions, and
//! quantiles of step distribution functions.
//!
//! Indices are zero-based throughout: group `j` is the `j`-th smallest distinct
//! covariate value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single `(x, y)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: f64,
    pub y: f64,
}

impl Observation {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Observations grouped by distinct covariate value.
///
/// Covariates are grouped by exact floating-point equality. Callers that want
/// tolerance-based grouping must round the covariates before grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignGroups {
    xs: Vec<f64>,
    weights: Vec<usize>,
    responses: Vec<Vec<f64>>,
    n: usize,
}

impl DesignGroups {
    /// Groups observations by covariate value, sorting responses within each group.
    pub fn from_observations(observations: &[Observation]) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::NoObservations);
        }
        if observations.iter().any(|o| !o.x.is_finite()) {
            return Err(Error::NonFinite("covariate"));
        }
        if observations.iter().any(|o| !o.y.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        let mut sorted: Vec<Observation> = observations.to_vec();
        sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));

        let mut xs = Vec::new();
        let mut responses: Vec<Vec<f64>> = Vec::new();
        for o in sorted {
            match xs.last() {
                Some(&last) if last == o.x => responses.last_mut().unwrap().push(o.y),
                _ => {
                    xs.push(o.x);
                    responses.push(vec![o.y]);
                }
            }
        }
        let weights = responses.iter().map(Vec::len).collect();
        Ok(Self { xs, weights, responses, n: observations.len() })
    }

    pub fn from_pairs(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { expected: x.len(), got: y.len() });
        }
        let obs: Vec<Observation> = x.iter().zip(y).map(|(&x, &y)| Observation::new(x, y)).collect();
        Self::from_observations(&obs)
    }

    /// Number of distinct covariate values.
    pub fn m(&self) -> usize {
        self.xs.len()
    }

    /// Total number of observations.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    /// Sorted responses of group `j`.
    pub fn responses(&self, j: usize) -> &[f64] {
        &self.responses[j]
    }

    pub fn all_responses(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.responses.iter().enumerate().flat_map(|(j, r)| r.iter().map(move |&y| (j, y)))
    }

    /// Distinct response values in increasing order.
    pub fn distinct_responses(&self) -> Vec<f64> {
        let mut ys: Vec<f64> = self.responses.iter().flatten().copied().collect();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        ys
    }

    /// Empirical distribution function of group `j`.
    pub fn empirical_cdf(&self, j: usize) -> Result<StepCdf> {
        if j >= self.m() {
            return Err(Error::IndexOutOfRange { index: j, len: self.m() });
        }
        Ok(StepCdf::from_sorted_sample(&self.responses[j]))
    }

    /// Weight-averaged distribution function of groups `r..=s`, which is the
    /// empirical distribution function of their pooled responses.
    pub fn pooled_cdf(&self, r: usize, s: usize) -> Result<StepCdf> {
        if r > s || s >= self.m() {
            return Err(Error::InvalidRange { start: r, end: s, len: self.m() });
        }
        let mut pooled: Vec<f64> = self.responses[r..=s].iter().flatten().copied().collect();
        pooled.sort_by(f64::total_cmp);
        Ok(StepCdf::from_sorted_sample(&pooled))
    }

    /// Total weight of groups `r..=s`.
    pub fn pooled_weight(&self, r: usize, s: usize) -> usize {
        self.weights[r..=s].iter().sum()
    }
}

/// Which end of the set of `beta`-quantiles to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `min { y : F(y) >= beta }`
    Minimal,
    /// `inf { y : F(y) > beta }`
    Maximal,
}

/// Right-continuous step distribution function with finitely many jumps.
///
/// Empirical distribution functions also carry their cumulative counts, so
/// tests can compare levels as exact fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCdf {
    jumps: Vec<f64>,
    values: Vec<f64>,
    counts: Option<(Vec<u64>, u64)>,
}

impl StepCdf {
    /// Empirical distribution function of an ascending sample.
    pub fn from_sorted_sample(sample: &[f64]) -> Self {
        debug_assert!(sample.windows(2).all(|w| w[0] <= w[1]));
        let total = sample.len() as u64;
        let mut jumps = Vec::new();
        let mut cum = Vec::new();
        for (i, &y) in sample.iter().enumerate() {
            if jumps.last() == Some(&y) {
                *cum.last_mut().unwrap() = i as u64 + 1;
            } else {
                jumps.push(y);
                cum.push(i as u64 + 1);
            }
        }
        let values = cum.iter().map(|&c| c as f64 / total as f64).collect();
        Self { jumps, values, counts: Some((cum, total)) }
    }

    /// Builds a step function from jump points and the values attained at them.
    /// Plateaus (repeated values) and leading zeros are dropped.
    pub fn from_levels(points: &[f64], levels: &[f64]) -> Result<Self> {
        if points.len() != levels.len() {
            return Err(Error::LengthMismatch { expected: points.len(), got: levels.len() });
        }
        let mut jumps = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut prev_point = f64::NEG_INFINITY;
        for (&t, &v) in points.iter().zip(levels) {
            if !t.is_finite() || !v.is_finite() {
                return Err(Error::NonFinite("step function"));
            }
            if t <= prev_point {
                return Err(Error::Precondition("jump points must be strictly increasing".into()));
            }
            prev_point = t;
            let last = values.last().copied().unwrap_or(0.0);
            if v < last || v > 1.0 {
                return Err(Error::Precondition("levels must be non-decreasing within [0, 1]".into()));
            }
            if v > last {
                jumps.push(t);
                values.push(v);
            }
        }
        if values.last() != Some(&1.0) {
            return Err(Error::Precondition("step function must end at 1".into()));
        }
        Ok(Self { jumps, values, counts: None })
    }

    pub fn jump_points(&self) -> &[f64] {
        &self.jumps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Cumulative counts at each jump and the sample size, for empirical CDFs.
    pub fn counts(&self) -> Option<(&[u64], u64)> {
        self.counts.as_ref().map(|(c, t)| (c.as_slice(), *t))
    }

    /// `F(y)`.
    pub fn eval(&self, y: f64) -> f64 {
        let k = self.jumps.partition_point(|&t| t <= y);
        if k == 0 {
            0.0
        } else {
            self.values[k - 1]
        }
    }

    /// Left limit `F(y-)`.
    pub fn eval_left(&self, y: f64) -> f64 {
        let k = self.jumps.partition_point(|&t| t < y);
        if k == 0 {
            0.0
        } else {
            self.values[k - 1]
        }
    }

    /// Quantile at an arbitrary level in `(0, 1)`.
    pub fn quantile(&self, beta: f64, side: Side) -> Result<f64> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::BetaOutOfRange(beta));
        }
        let k = match side {
            Side::Minimal => self.values.partition_point(|&v| v < beta),
            Side::Maximal => self.values.partition_point(|&v| v <= beta),
        };
        // last value is 1 > beta, so k is always a valid index
        Ok(self.jumps[k])
    }

    /// Supremum distance to another step distribution function.
    pub fn sup_distance(&self, other: &StepCdf) -> f64 {
        self.jumps
            .iter()
            .chain(other.jumps.iter())
            .map(|&t| (self.eval(t) - other.eval(t)).abs())
            .fold(0.0, f64::max)
    }
}

/// Minimal or maximal `beta`-quantile of a step distribution function.
pub fn step_quantile(f: &StepCdf, beta: f64, side: Side) -> Result<f64> {
    f.quantile(beta, side)
}
