//! Continuous reference distributions with closed-form distribution and
//! quantile functions.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::order::{Side, StepCdf};

/// Anything with a quantile function on `(0, 1)`.
pub trait QuantileFunction {
    fn quantile(&self, beta: f64) -> f64;
}

/// A continuous distribution function with density.
pub trait ContinuousDistribution: QuantileFunction {
    fn cdf(&self, y: f64) -> f64;
    fn density(&self, y: f64) -> f64;
    /// Upper bound on the density; the Lipschitz constant of `cdf`.
    fn max_density(&self) -> f64;
}

impl QuantileFunction for StepCdf {
    /// Minimal quantile. Panics outside `(0, 1)`.
    fn quantile(&self, beta: f64) -> f64 {
        StepCdf::quantile(self, beta, Side::Minimal).expect("level in (0, 1)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform {
    pub lo: f64,
    pub hi: f64,
}

impl Uniform {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "empty support");
        Self { lo, hi }
    }
}

impl QuantileFunction for Uniform {
    fn quantile(&self, beta: f64) -> f64 {
        if self.lo == 0.0 && self.hi == 1.0 {
            return beta;
        }
        self.lo + beta * (self.hi - self.lo)
    }
}

impl ContinuousDistribution for Uniform {
    fn cdf(&self, y: f64) -> f64 {
        ((y - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    fn density(&self, y: f64) -> f64 {
        if (self.lo..=self.hi).contains(&y) {
            1.0 / (self.hi - self.lo)
        } else {
            0.0
        }
    }

    fn max_density(&self) -> f64 {
        1.0 / (self.hi - self.lo)
    }
}

#[derive(Debug, Clone)]
pub struct Gaussian {
    inner: Normal,
    sd: f64,
}

impl Gaussian {
    pub fn new(mean: f64, sd: f64) -> Self {
        Self { inner: Normal::new(mean, sd).expect("positive standard deviation"), sd }
    }
}

impl QuantileFunction for Gaussian {
    fn quantile(&self, beta: f64) -> f64 {
        // one Newton step on top of the rational approximation
        let q = self.inner.inverse_cdf(beta);
        let d = self.inner.pdf(q);
        if d > 0.0 {
            q - (self.inner.cdf(q) - beta) / d
        } else {
            q
        }
    }
}

impl ContinuousDistribution for Gaussian {
    fn cdf(&self, y: f64) -> f64 {
        self.inner.cdf(y)
    }

    fn density(&self, y: f64) -> f64 {
        self.inner.pdf(y)
    }

    fn max_density(&self) -> f64 {
        1.0 / (self.sd * (2.0 * std::f64::consts::PI).sqrt())
    }
}
