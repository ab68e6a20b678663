//! How quantiles move when a distribution function is perturbed in sup norm,
//! and the Lipschitz bound for quantile functions under a density floor.

use crate::analytic::QuantileFunction;
use crate::error::{Error, Result};
use crate::order::{Side, StepCdf};

// Shift levels by this much so that rounding in `beta +- delta` cannot flip an
// exact equality case.
const LEVEL_SLACK: f64 = 1e-12;

/// For `||F - G|| <= delta`, checks
///
/// ```text
/// G^{-1}(beta)  >= F^{-1}(beta - delta)        when delta < beta
/// G^{-1}(beta+) <= F^{-1}((beta + delta)+)     when beta < 1 - delta
/// ```
///
/// Only the inequalities whose level condition holds are checked; at least
/// one must apply. Errors on violated preconditions instead of returning false.
pub fn quantile_shift_bounds(f: &StepCdf, g: &StepCdf, beta: f64, delta: f64) -> Result<bool> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::BetaOutOfRange(beta));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Precondition(format!("delta {delta} outside [0, 1)")));
    }
    let dist = f.sup_distance(g);
    if dist > delta {
        return Err(Error::Precondition(format!("sup distance {dist} exceeds delta {delta}")));
    }
    let lower_applies = delta < beta;
    let upper_applies = beta < 1.0 - delta;
    if !lower_applies && !upper_applies {
        return Err(Error::Precondition(format!("no bound applies at beta {beta} with delta {delta}")));
    }
    let mut ok = true;
    if lower_applies {
        let level = (beta - delta - LEVEL_SLACK).max(f64::MIN_POSITIVE);
        ok &= g.quantile(beta, Side::Minimal)? >= f.quantile(level, Side::Minimal)?;
    }
    if upper_applies {
        let level = (beta + delta + LEVEL_SLACK).min(1.0 - f64::EPSILON);
        ok &= g.quantile(beta, Side::Maximal)? <= f.quantile(level, Side::Maximal)?;
    }
    Ok(ok)
}

/// `|F^{-1}(b) - F^{-1}(b')| <= |b - b'| / kappa` for a pair of levels inside
/// `(beta1, beta2)`, where the caller asserts that `F` grows at rate at least
/// `kappa` between its `beta1`- and `beta2`-quantiles.
pub fn quantile_lipschitz_check<F: QuantileFunction + ?Sized>(
    f: &F,
    beta1: f64,
    beta2: f64,
    kappa: f64,
    betas: (f64, f64),
) -> Result<bool> {
    if !(kappa > 0.0) {
        return Err(Error::Precondition(format!("kappa {kappa} must be positive")));
    }
    let (b, b2) = betas;
    for v in [b, b2] {
        if !(beta1 < v && v < beta2) {
            return Err(Error::Precondition(format!("level {v} outside ({beta1}, {beta2})")));
        }
    }
    let lhs = (f.quantile(b) - f.quantile(b2)).abs();
    let rhs = (b - b2).abs() / kappa;
    Ok(lhs <= rhs * (1.0 + 1e-12) + 1e-14)
}
