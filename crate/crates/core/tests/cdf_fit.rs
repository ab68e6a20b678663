mod common;

use common::*;
use isodist::isoreg::pava_antitonic_ls;
use isodist::{evaluate_cdf, fit_cdf_family, CdfFamilyFit, Error, Interpolation};
use proptest::prelude::*;

const MODES: [Interpolation; 3] = [Interpolation::Linear, Interpolation::StepLeft, Interpolation::StepRight];

/// Raw empirical CDF values `F_j(y_k)` as the PAVA targets.
fn raw_column(data: &[(f64, f64)], xs: &[f64], y: f64) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let group: Vec<f64> = data.iter().filter(|p| p.0 == x).map(|p| p.1).collect();
            let (c, t) = ecdf_count(&group, y);
            c as f64 / t as f64
        })
        .collect()
}

#[test]
fn single_group_is_ecdf() {
    let data = [(1.0, 3.0), (1.0, 1.0), (1.0, 3.0), (1.0, 2.0)];
    let fit = fit_cdf_family(&groups(&data));
    assert_eq!(fit.thresholds(), &[1.0, 2.0, 3.0]);
    assert_eq!(fit.row(0), vec![0.25, 0.5, 1.0]);
    assert_eq!(fit.minmax_verify(0, 1).unwrap(), 0.5);
}

#[test]
fn ordered_groups_unchanged() {
    let data = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)];
    let fit = fit_cdf_family(&groups(&data));
    assert_eq!(fit.to_dense(), vec![1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]);
}

#[test]
fn counterexample_pools() {
    let fit = fit_cdf_family(&groups(&[(0.0, 1.0), (1.0, 0.0)]));
    assert_eq!(fit.column(0), vec![0.5, 0.5]);
    assert_eq!(fit.column(1), vec![1.0, 1.0]);
    assert_eq!(evaluate_cdf(&fit, 0.0, 0.5).unwrap(), 0.5);
}

#[test]
fn evaluation_modes() {
    let data = [(0.0, 1.0), (0.0, 2.0), (1.0, 2.0), (1.0, 3.0), (2.0, 3.0)];
    let base = fit_cdf_family(&groups(&data));
    for mode in MODES {
        let fit = base.clone().with_interpolation(mode);
        for j in 0..fit.m() {
            for (k, &y) in fit.thresholds().iter().enumerate() {
                assert_eq!(fit.evaluate(fit.xs()[j], y).unwrap(), fit.value(j, k));
                assert_eq!(fit.evaluate(fit.xs()[j], y + 0.5).unwrap(), fit.value(j, k));
            }
        }
        assert_eq!(fit.evaluate(-5.0, 1.0).unwrap(), fit.value(0, 0));
        assert_eq!(fit.evaluate(9.0, 2.0).unwrap(), fit.value(2, 1));
        assert_eq!(fit.evaluate(0.5, 0.99).unwrap(), 0.0);
        assert!(matches!(fit.evaluate(f64::NAN, 1.0), Err(Error::NonFinite(_))));
        assert!(fit.evaluate(0.5, f64::NAN).is_err());
    }
    let lin = base.clone();
    assert_eq!(lin.evaluate(0.5, 2.0).unwrap(), 0.5 * (lin.value(0, 1) + lin.value(1, 1)));
    let left = base.clone().with_interpolation(Interpolation::StepLeft);
    let right = base.with_interpolation(Interpolation::StepRight);
    assert_eq!(left.evaluate(0.5, 2.0).unwrap(), left.value(0, 1));
    assert_eq!(right.evaluate(0.5, 2.0).unwrap(), right.value(1, 1));
}

#[test]
fn index_errors() {
    let fit = fit_cdf_family(&groups(&[(0.0, 1.0), (1.0, 0.0)]));
    assert!(matches!(fit.minmax_verify(2, 0), Err(Error::IndexOutOfRange { .. })));
    assert!(matches!(fit.minmax_verify(0, 2), Err(Error::IndexOutOfRange { .. })));
    let loaded = CdfFamilyFit::from_json(&fit.to_json()).unwrap();
    assert!(loaded.minmax_verify(0, 0).is_err());
}

#[test]
fn json_schema() {
    let fit = fit_cdf_family(&groups(&[(0.0, 1.0), (1.0, 0.0), (1.0, 0.1)]));
    let v: serde_json::Value = serde_json::from_str(&fit.to_json()).unwrap();
    for key in ["xs", "weights", "thresholds", "values", "interpolation"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["values"].as_array().unwrap().len(), 2 * 3);
    assert_eq!(v["interpolation"], "linear");
    assert!(fit.to_json().contains("1.0000000000000001e-1"));
    assert!(CdfFamilyFit::from_json(r#"{"xs":[0],"weights":[1],"thresholds":[0],"values":[0.5],"interpolation":"linear"}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lattice_invariants(data in real_data(8, 40)) {
        let fit = fit_cdf_family(&groups(&data));
        let (m, l) = (fit.m(), fit.thresholds().len());
        for k in 0..l {
            let col = fit.column(k);
            prop_assert!(col.windows(2).all(|w| w[0] >= w[1]));
        }
        for j in 0..m {
            let row = fit.row(j);
            prop_assert!(row.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert_eq!(row[l - 1], 1.0);
        }
        prop_assert_eq!(fit.max_column_violation(), 0.0);
    }

    #[test]
    fn columns_are_pava_fits(data in small_data(8, 40, 6)) {
        let g = groups(&data);
        let fit = fit_cdf_family(&g);
        let w: Vec<f64> = g.weights().iter().map(|&v| v as f64).collect();
        for (k, &y) in fit.thresholds().iter().enumerate() {
            let t = raw_column(&data, g.xs(), y);
            prop_assert!(max_abs_diff(&fit.column(k), &pava_antitonic_ls(&t, &w).unwrap()) <= 1e-12);
            prop_assert!(max_abs_diff(&fit.column(k), &antitonic_minmax(&t, &w)) <= 1e-12);
        }
    }

    #[test]
    fn minmax_verify_matches(data in real_data(7, 30)) {
        let fit = fit_cdf_family(&groups(&data));
        for j in 0..fit.m() {
            for k in 0..fit.thresholds().len() {
                prop_assert!((fit.minmax_verify(j, k).unwrap() - fit.value(j, k)).abs() <= 1e-12);
                prop_assert!((fit.maxmin_verify(j, k).unwrap() - fit.value(j, k)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn projection_optimality(data in small_data(6, 30, 5), perturb in prop::collection::vec(0.0f64..1.0, 6)) {
        let g = groups(&data);
        let fit = fit_cdf_family(&g);
        let w: Vec<f64> = g.weights().iter().map(|&v| v as f64).collect();
        for (k, &y) in fit.thresholds().iter().enumerate() {
            let t = raw_column(&data, g.xs(), y);
            let sse = |f: &[f64]| -> f64 { (0..f.len()).map(|j| w[j] * (t[j] - f[j]).powi(2)).sum() };
            // random antitonic competitor: sorted descending draws
            let mut other: Vec<f64> = perturb[..g.m()].to_vec();
            other.sort_by(|a, b| b.total_cmp(a));
            prop_assert!(sse(&fit.column(k)) <= sse(&other) + 1e-12);
        }
    }

    #[test]
    fn json_round_trip_is_exact(data in real_data(6, 25), mode in 0usize..3) {
        let fit = fit_cdf_family(&groups(&data)).with_interpolation(MODES[mode]);
        let back = CdfFamilyFit::from_json(&fit.to_json()).unwrap();
        prop_assert_eq!(back.xs(), fit.xs());
        prop_assert_eq!(back.thresholds(), fit.thresholds());
        prop_assert_eq!(back.to_dense(), fit.to_dense());
        prop_assert_eq!(back.interpolation(), fit.interpolation());
    }

    #[test]
    fn evaluation_shape(data in small_data(5, 25, 5), xq in prop::collection::vec(-1.0f64..5.0, 6), yq in prop::collection::vec(-1.0f64..6.0, 6)) {
        let base = fit_cdf_family(&groups(&data));
        let mut xq = xq;
        xq.sort_by(f64::total_cmp);
        let mut yq = yq;
        yq.sort_by(f64::total_cmp);
        for mode in MODES {
            let fit = base.clone().with_interpolation(mode);
            for &y in &yq {
                let vals: Vec<f64> = xq.iter().map(|&x| fit.evaluate(x, y).unwrap()).collect();
                prop_assert!(vals.windows(2).all(|w| w[0] >= w[1] - 1e-15));
            }
            for &x in &xq {
                let vals: Vec<f64> = yq.iter().map(|&y| fit.evaluate(x, y).unwrap()).collect();
                prop_assert!(vals.windows(2).all(|w| w[0] <= w[1] + 1e-15));
                prop_assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
        let left = base.clone().with_interpolation(Interpolation::StepLeft);
        let right = base.clone().with_interpolation(Interpolation::StepRight);
        for &x in &xq {
            for &y in &yq {
                let (l, r, v) = (left.evaluate(x, y).unwrap(), right.evaluate(x, y).unwrap(), base.evaluate(x, y).unwrap());
                prop_assert!(r - 1e-15 <= v && v <= l + 1e-15);
            }
        }
    }
}
