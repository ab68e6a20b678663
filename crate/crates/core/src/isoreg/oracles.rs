//! Concrete loss oracles: weighted squared loss and the pinball loss.

use super::band::LossOracle;
use crate::error::{Error, Result};
use crate::order::DesignGroups;

/// `R_j(q) = w_j (t_j - q)^2`; every pooled loss has the weighted mean as its
/// unique minimizer.
#[derive(Debug, Clone)]
pub struct SquaredLossOracle {
    targets: Vec<f64>,
    weights: Vec<f64>,
}

impl SquaredLossOracle {
    pub fn new(targets: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if targets.len() != weights.len() {
            return Err(Error::LengthMismatch { expected: targets.len(), got: weights.len() });
        }
        if let Some(i) = weights.iter().position(|&w| !(w > 0.0)) {
            return Err(Error::NonPositiveWeight(i));
        }
        Ok(Self { targets, weights })
    }
}

impl LossOracle for SquaredLossOracle {
    fn len(&self) -> usize {
        self.targets.len()
    }

    fn interval_minimizers(&self, a: usize, b: usize) -> (f64, f64) {
        let (s, w) = (a..=b).fold((0.0, 0.0), |(s, w), j| {
            (s + self.weights[j] * self.targets[j], w + self.weights[j])
        });
        (s / w, s / w)
    }

    fn tolerance(&self) -> f64 {
        1e-12
    }

    fn row(&self, a: usize, out: &mut Vec<(f64, f64)>) {
        out.clear();
        let (mut s, mut w) = (0.0, 0.0);
        for j in a..self.len() {
            s += self.weights[j] * self.targets[j];
            w += self.weights[j];
            out.push((s / w, s / w));
        }
    }

    fn column(&self, b: usize, out: &mut Vec<(f64, f64)>) {
        out.clear();
        out.resize(b + 1, (0.0, 0.0));
        let (mut s, mut w) = (0.0, 0.0);
        for a in (0..=b).rev() {
            s += self.weights[a] * self.targets[a];
            w += self.weights[a];
            out[a] = (s / w, s / w);
        }
    }
}

/// Fenwick tree over response ranks holding counts.
#[derive(Debug, Clone)]
struct Fenwick {
    tree: Vec<u64>,
    top: usize,
}

impl Fenwick {
    fn new(size: usize) -> Self {
        let top = if size == 0 { 0 } else { 1 << (usize::BITS - 1 - size.leading_zeros()) };
        Self { tree: vec![0; size + 1], top }
    }

    fn add(&mut self, rank: usize, v: u64) {
        let mut i = rank + 1;
        while i < self.tree.len() {
            self.tree[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    /// Smallest rank whose prefix count satisfies `pred`; `pred` must be
    /// monotone in the count and hold for the full total.
    fn first_rank(&self, pred: impl Fn(u64) -> bool) -> usize {
        let mut pos = 0;
        let mut acc = 0;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && !pred(acc + self.tree[next]) {
                pos = next;
                acc += self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

/// Pinball-loss oracle for grouped data: `R_j(q) = sum_{i in group j} rho_beta(Y_i - q)`.
///
/// The minimizers of a pooled loss over groups `a..=b` are the minimal and
/// maximal `beta`-quantiles of the pooled responses. Rows and columns are
/// filled incrementally with a Fenwick tree over response ranks.
#[derive(Debug, Clone)]
pub struct PinballOracle {
    beta: f64,
    values: Vec<f64>,
    ranks: Vec<Vec<usize>>,
    weights: Vec<u64>,
}

impl PinballOracle {
    pub fn new(groups: &DesignGroups, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::BetaOutOfRange(beta));
        }
        let values = groups.distinct_responses();
        let ranks = (0..groups.m())
            .map(|j| {
                groups
                    .responses(j)
                    .iter()
                    .map(|y| values.partition_point(|v| v < y))
                    .collect()
            })
            .collect();
        let weights = groups.weights().iter().map(|&w| w as u64).collect();
        Ok(Self { beta, values, ranks, weights })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn quantiles(&self, fw: &Fenwick, total: u64) -> (f64, f64) {
        let w = total as f64;
        let beta = self.beta;
        let lo = fw.first_rank(|c| c as f64 / w >= beta);
        let hi = fw.first_rank(|c| c as f64 / w > beta);
        (self.values[lo], self.values[hi])
    }

    fn insert(&self, fw: &mut Fenwick, j: usize) {
        for &r in &self.ranks[j] {
            fw.add(r, 1);
        }
    }
}

impl LossOracle for PinballOracle {
    fn len(&self) -> usize {
        self.ranks.len()
    }

    fn interval_minimizers(&self, a: usize, b: usize) -> (f64, f64) {
        let mut fw = Fenwick::new(self.values.len());
        let mut total = 0;
        for j in a..=b {
            self.insert(&mut fw, j);
            total += self.weights[j];
        }
        self.quantiles(&fw, total)
    }

    fn row(&self, a: usize, out: &mut Vec<(f64, f64)>) {
        out.clear();
        let mut fw = Fenwick::new(self.values.len());
        let mut total = 0;
        for b in a..self.len() {
            self.insert(&mut fw, b);
            total += self.weights[b];
            out.push(self.quantiles(&fw, total));
        }
    }

    fn column(&self, b: usize, out: &mut Vec<(f64, f64)>) {
        out.clear();
        out.resize(b + 1, (0.0, 0.0));
        let mut fw = Fenwick::new(self.values.len());
        let mut total = 0;
        for a in (0..=b).rev() {
            self.insert(&mut fw, a);
            total += self.weights[a];
            out[a] = self.quantiles(&fw, total);
        }
    }
}
