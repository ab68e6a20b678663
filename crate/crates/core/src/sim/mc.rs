//! Monte Carlo checks of the exponential inequalities for empirical
//! distribution functions of independent, non-identical samples and for
//! suprema of running means.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::trial::trial_rng;
use crate::analytic::ContinuousDistribution;

/// Exceedance count of one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exceedance {
    pub eta: f64,
    pub count: u64,
    pub reps: u64,
}

impl Exceedance {
    pub fn frequency(&self) -> f64 {
        self.count as f64 / self.reps as f64
    }

    /// Binomial standard error at the observed frequency.
    pub fn standard_error(&self) -> f64 {
        let p = self.frequency();
        (p * (1.0 - p) / self.reps as f64).sqrt()
    }
}

/// `2^{5/2} e`, the bound on the universal constant in the inequality for
/// non-identical samples.
pub fn dkw_universal_constant() -> f64 {
    2f64.powf(2.5) * std::f64::consts::E
}

/// `sqrt(k) ||F_hat - F_bar||` for one sample, `Y_i ~ F_i`, computed exactly at
/// the order statistics.
pub fn scaled_sup_distance<D: ContinuousDistribution>(dists: &[D], sample: &mut [f64]) -> f64 {
    let k = dists.len() as f64;
    sample.sort_by(f64::total_cmp);
    let mut sup: f64 = 0.0;
    for (i, &y) in sample.iter().enumerate() {
        let fbar = dists.iter().map(|d| d.cdf(y)).sum::<f64>() / k;
        sup = sup.max((fbar - i as f64 / k).abs()).max(((i + 1) as f64 / k - fbar).abs());
    }
    k.sqrt() * sup
}

/// Frequencies of `sqrt(k) ||F_hat - F_bar|| >= eta` over `reps` samples of
/// independent `Y_i ~ F_i`, `i = 1..k`.
pub fn dkw_mc<D: ContinuousDistribution>(dists: &[D], etas: &[f64], reps: u64, seed: u64) -> Vec<Exceedance> {
    let k = dists.len();
    let mut rng = trial_rng(seed, k, 0);
    let mut counts = vec![0u64; etas.len()];
    let mut sample = vec![0.0; k];
    for _ in 0..reps {
        for (s, d) in sample.iter_mut().zip(dists) {
            *s = d.quantile(open_unit(&mut rng));
        }
        let stat = scaled_sup_distance(dists, &mut sample);
        for (c, &eta) in counts.iter_mut().zip(etas) {
            if stat >= eta {
                *c += 1;
            }
        }
    }
    etas.iter().zip(counts).map(|(&eta, count)| Exceedance { eta, count, reps }).collect()
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Bounded centred increments for the running-mean check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Increment {
    /// `+-scale` with probability 1/2 each.
    Rademacher { scale: f64 },
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
}

impl Increment {
    /// Almost-sure bound on `|Z_i|`.
    pub fn bound(&self) -> f64 {
        match *self {
            Increment::Rademacher { scale } => scale.abs(),
            Increment::Uniform { half_width } => half_width.abs(),
        }
    }

    /// Hoeffding constants `(c, C)` with `P(|S_b - S_a| > eta) <= C exp(-c eta^2 / (b - a))`.
    pub fn hoeffding(&self) -> (f64, f64) {
        let range = 2.0 * self.bound();
        (2.0 / (range * range), 2.0)
    }
}

/// `C'` from the proof of the running-mean inequality: with
/// `beta = (c/c' + 1)^2 / (4 c/c')` and `p_o = min{1 / log beta, log(4C)}`,
/// `C' = 2C (1 + 1 / (p_o log beta))`.
pub fn lln_constant(c: f64, c_prime: f64, big_c: f64) -> f64 {
    let ratio = c / c_prime;
    let beta = (ratio + 1.0).powi(2) / (4.0 * ratio);
    let p_o = (1.0 / beta.ln()).min((4.0 * big_c).ln());
    2.0 * big_c * (1.0 + 1.0 / (p_o * beta.ln()))
}

/// Exceedance frequencies of `max_{n_o <= n <= n_max} |S_n / n| >= eta` for
/// every `(n_o, eta)` pair, flattened with `eta` varying fastest.
///
/// The supremum is truncated at `n_max`, so frequencies are lower bounds for
/// the untruncated event.
pub fn lln_exp_mc(
    n_os: &[usize],
    n_max: usize,
    etas: &[f64],
    reps: u64,
    seed: u64,
    law: Increment,
) -> Vec<(usize, Exceedance)> {
    let mut rng = trial_rng(seed, n_max, 1);
    let mut counts = vec![0u64; n_os.len() * etas.len()];
    let mut means = vec![0.0f64; n_max + 1];
    for _ in 0..reps {
        let mut s = 0.0;
        let mut bits = 0u64;
        for (n, slot) in means.iter_mut().enumerate().skip(1) {
            let z = match law {
                Increment::Rademacher { scale } => {
                    if (n - 1) % 64 == 0 {
                        bits = rng.next_u64();
                    }
                    let z = if bits & 1 == 1 { scale } else { -scale };
                    bits >>= 1;
                    z
                }
                Increment::Uniform { half_width } => (2.0 * rng.random::<f64>() - 1.0) * half_width,
            };
            s += z;
            *slot = (s / n as f64).abs();
        }
        // suffix maxima read off at each n_o
        let mut order: Vec<(usize, usize)> = n_os.iter().copied().enumerate().map(|(i, n)| (n, i)).collect();
        order.sort_unstable_by(|a, b| b.cmp(a));
        let mut run: f64 = 0.0;
        let mut n = n_max;
        for (n_o, i) in order {
            while n >= n_o.max(1) {
                run = run.max(means[n]);
                n -= 1;
            }
            for (e, &eta) in etas.iter().enumerate() {
                if run >= eta {
                    counts[i * etas.len() + e] += 1;
                }
            }
        }
    }
    let mut out = Vec::with_capacity(counts.len());
    for (i, &n_o) in n_os.iter().enumerate() {
        for (e, &eta) in etas.iter().enumerate() {
            out.push((n_o, Exceedance { eta, count: counts[i * etas.len() + e], reps }));
        }
    }
    out
}
