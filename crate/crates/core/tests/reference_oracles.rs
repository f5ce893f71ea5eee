use krigrisk::bench::reference::{eta_scan, gamma_by_quadrature, moment_enumeration, rn_quantile_count, var_double_sum};
use krigrisk::field::{cx_bounds, FailureReport, ProbGroups, ReportConfig};
use proptest::prelude::*;

fn probs_strategy(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![Just(0.0), Just(1.0), Just(0.5), 0.0f64..=1.0],
        1..max,
    )
}

proptest! {
    #[test]
    fn grouped_variance_matches_double_sum(p in probs_strategy(300)) {
        let g = ProbGroups::from_probs(&p).unwrap();
        let brute = var_double_sum(&p).unwrap();
        prop_assert!((g.var_rn() - brute).abs() <= 1e-12 * brute.abs().max(1e-3));
    }

    #[test]
    fn moments_match_enumeration(p in probs_strategy(40), m in 1u32..=3) {
        let g = ProbGroups::from_probs(&p).unwrap();
        prop_assert!((g.moment_rn(m).unwrap() - moment_enumeration(&p, m).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn convex_bounds_match_quadrature(p in probs_strategy(200), a in 0.01f64..0.99) {
        let g = ProbGroups::from_probs(&p).unwrap();
        let (lo, hi) = cx_bounds(&g, a).unwrap();
        let (qlo, qhi) = gamma_by_quadrature(&p, a).unwrap();
        prop_assert!((lo - qlo).abs() < 1e-10 && (hi - qhi).abs() < 1e-10);
    }

    #[test]
    fn quantile_function_matches_count(p in probs_strategy(200), a in 0.001f64..0.999) {
        let g = ProbGroups::from_probs(&p).unwrap();
        prop_assert_eq!(g.quantile_rn(a).unwrap(), rn_quantile_count(&p, a));
    }

    #[test]
    fn eta_matches_scan(p in probs_strategy(200), q in 0.0f64..=1.0) {
        let g = ProbGroups::from_probs(&p).unwrap();
        prop_assert!((g.eta(q) - eta_scan(&p, q)).abs() < 1e-13);
    }
}

#[test]
fn three_point_cloud_example() {
    let p = [0.2, 0.5, 0.9];
    let g = ProbGroups::from_probs(&p).unwrap();
    let avg = p.iter().map(|&v| g.eta(v)).sum::<f64>() / 3.0;
    assert!((avg - 7.0 / 75.0).abs() < 1e-15);
    assert!((g.var_rn() - 7.0 / 75.0).abs() < 1e-15);
}

#[test]
fn single_atom_report() {
    let g = ProbGroups::from_probs(&[0.3]).unwrap();
    let r = FailureReport::compute(&g, &ReportConfig::default()).unwrap();
    assert_eq!(r.n, 1);
    assert!((r.var_rn - 0.21).abs() < 1e-15);
    assert!(r.credible_cx.lower <= r.credible_cx.upper);
}

#[test]
fn grouped_variance_cancellation_case() {
    let p = [1.0,1.0,1.0,1.0,0.0,1.0,1.0,1.0,0.0,1.0,1.0,0.0,1.0,1.0,0.0,1.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,1.0,1.0,1.0,1.0,1.0,1.0,1.0,0.0,1.0,0.0,1.0,1.0,1.0,1.0,0.0,1.0,1.0,1.0,0.0,0.0,0.9506178846920444,1.0,0.0,0.0,0.0,1.0,1.0,1.0,1.0,0.0,0.0,0.0,0.0,0.9664529163041788,1.0,1.0,1.0,0.0,1.0,1.0,1.0,0.0,1.0,0.0,1.0,0.0,1.0,0.0,1.0,1.0,1.0,1.0,1.0,0.0,1.0,0.0,1.0,1.0,0.0,1.0,1.0,1.0,0.0,1.0,1.0,1.0,1.0,1.0,0.0,0.0,1.0,1.0,1.0,0.0,1.0,1.0,1.0,1.0,1.0,1.0,0.0,1.0,1.0,1.0,1.0,0.0,1.0,1.0,1.0,0.0,1.0,1.0,0.0,0.0,1.0,1.0,0.0,1.0,0.0,1.0,1.0,0.0,1.0,1.0,0.0,1.0,1.0,0.0,1.0,0.8521294321263152,1.0,0.0,0.8134204014932676,1.0,1.0,0.0,1.0,1.0,1.0,1.0,0.0,1.0,0.0,1.0,0.0,0.8837454464621862,1.0,0.0,1.0,1.0,1.0,0.0,1.0,0.0,1.0,0.0,0.0,1.0,1.0,1.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,1.0,1.0,0.5,0.5,0.5508142676119466,0.4376298201329979,1.0,0.39859350253180903,0.3182582753043931,0.45525977941100765,1.0,1.0,0.44297580621177435,1.0,0.5386525721376777,1.0,1.0,0.5];
    let g = ProbGroups::from_probs(&p).unwrap();
    let brute = var_double_sum(&p).unwrap();
    assert!((g.var_rn() - brute).abs() <= 1e-12 * brute.abs().max(1e-3), "{} vs {brute}", g.var_rn());
}
