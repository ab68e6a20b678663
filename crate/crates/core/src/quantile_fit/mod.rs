//! Isotonic regression quantiles: solution bands, plug-in quantiles from a
//! fitted distribution family, pinball risk, a smooth curve inside the band and
//! quantile-calculus helpers.

mod calculus;
mod smooth;

pub use calculus::{quantile_lipschitz_check, quantile_shift_bounds};
pub use smooth::{smooth_band_curve, smooth_box_curve, SmoothCurve};

use serde::{Deserialize, Serialize};

use crate::cdf_fit::CdfFamilyFit;
use crate::error::{Error, Result};
use crate::isoreg::{minmax_band, pinball, PinballOracle, SolutionBand};
use crate::order::DesignGroups;

/// Smallest and largest isotonic `beta`-regression quantiles at the design points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileBand {
    #[serde(serialize_with = "crate::json::f64_17")]
    pub beta: f64,
    #[serde(serialize_with = "crate::json::vec_f64_17")]
    pub xs: Vec<f64>,
    #[serde(serialize_with = "crate::json::vec_f64_17")]
    pub lower: Vec<f64>,
    #[serde(serialize_with = "crate::json::vec_f64_17")]
    pub upper: Vec<f64>,
}

impl QuantileBand {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn as_solution_band(&self) -> SolutionBand {
        SolutionBand { lower: self.lower.clone(), upper: self.upper.clone() }
    }

    /// Indices `j` where the lower or upper bound increases from `j` to `j + 1`.
    pub fn increase_positions(&self) -> Vec<usize> {
        self.as_solution_band().increase_positions()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("band serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::BetaOutOfRange(beta))
    }
}

/// Solution band of the isotonic `beta`-quantile regression
/// `min sum_i rho_beta(Y_i - q(X_i))` over non-decreasing `q`.
///
/// Both evaluation orders of the min-max formulae are computed and compared
/// exactly. Fails with [`Error::DataInsideBand`] if an observation lies strictly
/// inside `(lower_j, upper_j)`, which cannot happen for a correct band.
pub fn quantile_band(groups: &DesignGroups, beta: f64) -> Result<QuantileBand> {
    check_beta(beta)?;
    let oracle = PinballOracle::new(groups, beta)?;
    let band = minmax_band(&oracle)?;
    for j in 0..groups.m() {
        let (lo, up) = (band.lower[j], band.upper[j]);
        if groups.responses(j).iter().any(|&y| lo < y && y < up) {
            return Err(Error::DataInsideBand(j));
        }
    }
    Ok(QuantileBand { beta, xs: groups.xs().to_vec(), lower: band.lower, upper: band.upper })
}

/// Minimal and maximal `beta`-quantiles of each fitted row.
pub fn plugin_quantiles(fit: &CdfFamilyFit, beta: f64) -> Result<QuantileBand> {
    check_beta(beta)?;
    let l = fit.thresholds().len();
    let mut lower = Vec::with_capacity(fit.m());
    let mut upper = Vec::with_capacity(fit.m());
    for j in 0..fit.m() {
        // rows are non-decreasing in k and end at 1 > beta
        let first = |pred: &dyn Fn(f64) -> bool| {
            let (mut lo, mut hi) = (0, l - 1);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if pred(fit.value(j, mid)) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            fit.thresholds()[lo]
        };
        lower.push(first(&|v| v >= beta));
        upper.push(first(&|v| v > beta));
    }
    Ok(QuantileBand { beta, xs: fit.xs().to_vec(), lower, upper })
}

/// Total pinball loss `T_beta(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinballRisk {
    pub beta: f64,
    pub value: f64,
}

pub fn pinball_risk(groups: &DesignGroups, q: &[f64], beta: f64) -> Result<PinballRisk> {
    if q.len() != groups.m() {
        return Err(Error::LengthMismatch { expected: groups.m(), got: q.len() });
    }
    let value = groups.all_responses().map(|(j, y)| pinball(beta, y - q[j])).sum();
    Ok(PinballRisk { beta, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdf_fit::fit_cdf_family;
    use crate::order::Side;

    fn two_point_data() -> DesignGroups {
        DesignGroups::from_pairs(&[0.0, 1.0], &[1.0, 0.0]).unwrap()
    }

    #[test]
    fn two_point_band_and_risk() {
        let g = two_point_data();
        let band = quantile_band(&g, 0.5).unwrap();
        assert_eq!(band.lower, vec![0.0, 0.0]);
        assert_eq!(band.upper, vec![1.0, 1.0]);
        assert_eq!(plugin_quantiles(&fit_cdf_family(&g), 0.5).unwrap(), band);
        for q in [0.0, 0.25, 0.5, 1.0] {
            assert_eq!(pinball_risk(&g, &[q, q], 0.5).unwrap().value, 0.5);
        }
        assert_eq!(pinball_risk(&g, &[0.0, 1.0], 0.5).unwrap().value, 1.0);
    }

    #[test]
    fn single_group_band_is_sample_quantile_interval() {
        let g = DesignGroups::from_pairs(&[2.0; 4], &[4.0, 1.0, 3.0, 2.0]).unwrap();
        let band = quantile_band(&g, 0.5).unwrap();
        let f = g.empirical_cdf(0).unwrap();
        assert_eq!(band.lower, vec![f.quantile(0.5, Side::Minimal).unwrap()]);
        assert_eq!(band.upper, vec![f.quantile(0.5, Side::Maximal).unwrap()]);
        assert_eq!((band.lower[0], band.upper[0]), (2.0, 3.0));
    }

    #[test]
    fn risk_zero_at_data() {
        let g = DesignGroups::from_pairs(&[0.0, 1.0, 2.0], &[5.0, -1.0, 3.0]).unwrap();
        assert_eq!(pinball_risk(&g, &[5.0, -1.0, 3.0], 0.3).unwrap().value, 0.0);
        assert!(matches!(pinball_risk(&g, &[0.0], 0.3), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn beta_range() {
        let g = two_point_data();
        assert!(matches!(quantile_band(&g, 0.0), Err(Error::BetaOutOfRange(_))));
        assert!(matches!(plugin_quantiles(&fit_cdf_family(&g), 1.0), Err(Error::BetaOutOfRange(_))));
    }

    #[test]
    fn band_json_round_trip() {
        let band = QuantileBand { beta: 0.1, xs: vec![0.1, 0.7], lower: vec![1.0 / 3.0, 0.5], upper: vec![0.4, 2.0 / 3.0] };
        let s = band.to_json();
        assert!(s.starts_with("{\"beta\":1.0000000000000001e-1,"));
        assert_eq!(QuantileBand::from_json(&s).unwrap(), band);
    }
}
