//! Pool-adjacent-violators.
//!
//! The engine is isotonic-native. Antitonic problems run the same pass over
//! reversed input.

use crate::error::{Error, Result};

/// A pooled block of observations.
pub(crate) trait Pool: Copy {
    fn merge(self, other: Self) -> Self;
    /// True when `self` followed by `next` must be pooled for the fit to stay
    /// non-decreasing.
    fn violates(&self, next: &Self) -> bool;
}

/// Weighted sum and total weight of a block. The mean is cached so that
/// unpooled entries come back exactly as given.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WeightedSum {
    pub sum: f64,
    pub weight: f64,
    mean: f64,
}

impl WeightedSum {
    pub fn new(target: f64, weight: f64) -> Self {
        Self { sum: weight * target, weight, mean: target }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }
}

impl Pool for WeightedSum {
    #[inline]
    fn merge(self, other: Self) -> Self {
        let (sum, weight) = (self.sum + other.sum, self.weight + other.weight);
        Self { sum, weight, mean: sum / weight }
    }

    #[inline]
    fn violates(&self, next: &Self) -> bool {
        self.mean > next.mean
    }
}

/// Indicator counts of a block: `count` of `weight` responses lie at or below
/// the current threshold. Block levels compare as exact fractions, and equal
/// neighbours are pooled so each fitted level is the fraction of its maximal
/// constant block.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CountPool {
    pub count: u64,
    pub weight: u64,
}

impl CountPool {
    pub fn level(&self) -> f64 {
        self.count as f64 / self.weight as f64
    }
}

impl Pool for CountPool {
    #[inline]
    fn merge(self, other: Self) -> Self {
        Self { count: self.count + other.count, weight: self.weight + other.weight }
    }

    #[inline]
    fn violates(&self, next: &Self) -> bool {
        self.count * next.weight >= next.count * self.weight
    }
}

/// Single forward pass with block merging. `blocks` receives `(pool, length)`
/// pairs in input order.
pub(crate) fn pava_into<P: Pool>(items: impl IntoIterator<Item = P>, blocks: &mut Vec<(P, usize)>) {
    blocks.clear();
    for item in items {
        let mut cur = (item, 1usize);
        while let Some(&(last, len)) = blocks.last() {
            if last.violates(&cur.0) {
                blocks.pop();
                cur = (last.merge(cur.0), len + cur.1);
            } else {
                break;
            }
        }
        blocks.push(cur);
    }
}

fn check_inputs(targets: &[f64], weights: &[f64]) -> Result<()> {
    if targets.len() != weights.len() {
        return Err(Error::LengthMismatch { expected: targets.len(), got: weights.len() });
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("targets"));
    }
    if let Some(i) = weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::NonPositiveWeight(i));
    }
    Ok(())
}

fn expand(blocks: &[(WeightedSum, usize)], out: &mut Vec<f64>) {
    for (b, len) in blocks {
        let v = b.mean();
        out.extend(std::iter::repeat_n(v, *len));
    }
}

/// Weighted least-squares projection onto non-decreasing vectors.
pub fn pava_isotonic_ls(targets: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    check_inputs(targets, weights)?;
    let mut blocks = Vec::with_capacity(targets.len());
    pava_into(
        targets.iter().zip(weights).map(|(&t, &w)| WeightedSum::new(t, w)),
        &mut blocks,
    );
    let mut out = Vec::with_capacity(targets.len());
    expand(&blocks, &mut out);
    Ok(out)
}

/// Weighted least-squares projection onto non-increasing vectors: the unique
/// minimizer of `sum_j w_j (t_j - f_j)^2` over `f_1 >= ... >= f_m`.
pub fn pava_antitonic_ls(targets: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    check_inputs(targets, weights)?;
    let mut blocks = Vec::with_capacity(targets.len());
    pava_into(
        targets.iter().zip(weights).rev().map(|(&t, &w)| WeightedSum::new(t, w)),
        &mut blocks,
    );
    let mut out = Vec::with_capacity(targets.len());
    expand(&blocks, &mut out);
    out.reverse();
    Ok(out)
}
