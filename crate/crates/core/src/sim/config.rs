use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analytic::{ContinuousDistribution, Gaussian, QuantileFunction};
use crate::error::{Error, Result};

/// True conditional distribution functions `x -> F_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `F_x(y) = Phi(y - x)`. Hölder exponent 1 with `C1 = (2 pi)^{-1/2}`.
    GaussianShift,
    /// `F_x = Uniform(x, x + 1)`. Hölder exponent 1 with `C1 = 1`, density 1.
    UniformShift,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::GaussianShift => "gaussian_shift",
            Family::UniformShift => "uniform_shift",
        }
    }

    pub fn cdf(&self, x: f64, y: f64) -> f64 {
        match self {
            Family::GaussianShift => standard_normal().cdf(y - x),
            Family::UniformShift => (y - x).clamp(0.0, 1.0),
        }
    }

    pub fn quantile(&self, x: f64, beta: f64) -> f64 {
        match self {
            Family::GaussianShift => x + standard_normal().quantile(beta),
            Family::UniformShift => x + beta,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        match self {
            Family::GaussianShift => x + rng.sample::<f64, _>(StandardNormal),
            Family::UniformShift => x + rng.random::<f64>(),
        }
    }

    /// Hölder constant for exponent 1 over the whole real line.
    pub fn c1(&self) -> f64 {
        match self {
            Family::GaussianShift => standard_normal().max_density(),
            Family::UniformShift => 1.0,
        }
    }

    /// Smallest density over `{y : beta1 < F_x(y) < beta2}`; the same for
    /// every `x` in a shift family.
    pub fn kappa(&self, beta1: f64, beta2: f64) -> f64 {
        match self {
            Family::GaussianShift => {
                let n = standard_normal();
                let edge = |b: f64| if b <= 0.0 || b >= 1.0 { 0.0 } else { n.density(n.quantile(b)) };
                edge(beta1).min(edge(beta2))
            }
            Family::UniformShift => 1.0,
        }
    }
}

fn standard_normal() -> Gaussian {
    Gaussian::new(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    /// `X_i = a + (i / n)(b - a)` for `i = 1..=n`.
    FixedEquispaced,
    /// Independent draws from the uniform density on `[a, b]`.
    IidUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub family: Family,
    pub design: Design,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Multiplier in the `M_n <= (D log n)^{1/2}` event; any `D > 1`.
    pub d: f64,
    pub kappa: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub seed: u64,
    pub reps: usize,
}

impl SimConfig {
    /// Built-in scenario on `I = [0, 1]` with `alpha = 1`, `C2 = 0.5`,
    /// `C3 = 1`, `D = 1.5` and `(beta1, beta2) = (0.05, 0.95)`.
    pub fn scenario(family: Family, design: Design) -> Self {
        let (beta1, beta2) = (0.05, 0.95);
        Self {
            family,
            design,
            a: 0.0,
            b: 1.0,
            alpha: 1.0,
            c1: family.c1(),
            c2: 0.5,
            c3: 1.0,
            d: 1.5,
            kappa: family.kappa(beta1, beta2),
            beta1,
            beta2,
            seed: 20_190_501,
            reps: 20,
        }
    }

    pub fn gaussian_shift() -> Self {
        Self::scenario(Family::GaussianShift, Design::FixedEquispaced)
    }

    /// Looks up a scenario by name: `gaussian_shift`, `uniform_shift`, and the
    /// same with an `_iid` suffix for the random design.
    pub fn named(name: &str) -> Option<Self> {
        let (base, design) = match name.strip_suffix("_iid") {
            Some(base) => (base, Design::IidUniform),
            None => (name, Design::FixedEquispaced),
        };
        let family = match base {
            "gaussian_shift" => Family::GaussianShift,
            "uniform_shift" => Family::UniformShift,
            _ => return None,
        };
        Some(Self::scenario(family, design))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Precondition(msg.to_string()));
        if !(self.a < self.b) {
            return bad("interval needs a < b");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0 && self.c3 > 0.0 && self.kappa > 0.0) {
            return bad("constants must be positive");
        }
        if !(self.d > 1.0) {
            return bad("D must exceed 1");
        }
        if !(0.0 <= self.beta1 && self.beta1 < self.beta2 && self.beta2 <= 1.0) {
            return bad("need 0 <= beta1 < beta2 <= 1");
        }
        if self.reps == 0 {
            return bad("reps must be positive");
        }
        Ok(())
    }

    /// `C = (C2 D / C3)^{1/2} + C1 C3^alpha`.
    pub fn rate_constant(&self) -> f64 {
        (self.c2 * self.d / self.c3).sqrt() + self.c1 * self.c3.powf(self.alpha)
    }
}

/// Sample-size dependent sequences for the uniform results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSchedule {
    pub n: usize,
    pub rho: f64,
    pub delta: f64,
    pub big_delta: f64,
    pub i_n: (f64, f64),
    pub b_n: (f64, f64),
}

impl RateSchedule {
    /// `rho_n = log n / n`, `delta_n = C3 rho_n^{1/(2 alpha + 1)}`,
    /// `Delta_n = C rho_n^{alpha/(2 alpha + 1)}`.
    pub fn uniform(config: &SimConfig, n: usize) -> Self {
        let rho = (n as f64).ln() / n as f64;
        Self::build(config, n, rho, rho)
    }

    /// Single-point version without the log factor: `delta_n = C3 n^{-1/(2 alpha + 1)}`.
    pub fn pointwise(config: &SimConfig, n: usize) -> Self {
        let rho = (n as f64).ln() / n as f64;
        Self::build(config, n, rho, 1.0 / n as f64)
    }

    fn build(config: &SimConfig, n: usize, rho: f64, base: f64) -> Self {
        let e = 2.0 * config.alpha + 1.0;
        let delta = config.c3 * base.powf(1.0 / e);
        let big_delta = config.rate_constant() * base.powf(config.alpha / e);
        Self {
            n,
            rho,
            delta,
            big_delta,
            i_n: (config.a + delta, config.b - delta),
            b_n: (config.beta1 + big_delta, config.beta2 - big_delta),
        }
    }

    /// `rho_n^{alpha/(2 alpha + 1)}`
    pub fn rate(&self, alpha: f64) -> f64 {
        self.rho.powf(alpha / (2.0 * alpha + 1.0))
    }

    pub fn interval(&self) -> Result<(f64, f64)> {
        let (lo, hi) = self.i_n;
        if lo > hi {
            return Err(Error::DegenerateSchedule(format!("I_n empty at n = {}", self.n)));
        }
        Ok(self.i_n)
    }

    pub fn levels(&self) -> Result<(f64, f64)> {
        let (lo, hi) = self.b_n;
        if !(lo < hi) {
            return Err(Error::DegenerateSchedule(format!("B_n empty at n = {}", self.n)));
        }
        Ok(self.b_n)
    }
}
