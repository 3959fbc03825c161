use ccilab::bell::chsh_max;
use ccilab::cci::{metrics, InputDistribution, Process};
use ccilab::delayed::*;
use ccilab::linalg::max_abs_diff;
use ccilab::Error;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tables_satisfy_their_own_locks(phi in -3.1f64..3.1, s in 0.05f64..0.95) {
        let spec = CatSpec::with_overlap(s, phi, 2).unwrap();
        let (o, c) = qdc_tables(&spec, -1).unwrap();
        prop_assert!(check_qdc_tables(&o, &c, &spec, &InputDistribution::only(-1)).is_ok());
        let st = qdc_final_state(&o, &c, &spec, &InputDistribution::only(-1)).unwrap();
        let simple = qdc_simple_state(phi, &spec).unwrap();
        prop_assert!(max_abs_diff(st.rho(), simple.rho()) <= 1e-9);
        prop_assert!((simple.ptilde() - qdc_norm(phi, s)).abs() <= 1e-9);
        let m = metrics(&st);
        prop_assert!(m.visibility.powi(2) + m.predictability.powi(2) <= 1.0 + 1e-9);
        prop_assert!(chsh_max(&st).unwrap() > 2.0);
    }

    #[test]
    fn any_table_perturbation_is_caught(phi in -3.1f64..3.1, s in 0.05f64..0.95, re in 0.05f64..1.0) {
        let spec = CatSpec::with_overlap(s, phi, 2).unwrap();
        let (mut o, c) = qdc_tables(&spec, -1).unwrap();
        let old = o.get(Process::One, 1, -1, 0);
        o.set(Process::One, 1, -1, 0, old + ccilab::C64::new(re, 0.0));
        let r = check_qdc_tables(&o, &c, &spec, &InputDistribution::only(-1));
        prop_assert!(matches!(r, Err(Error::ConditionViolation(_))));
    }

    #[test]
    fn cat_overlap_matches_formula(a in 0.0f64..1.5, b in 0.0f64..1.5) {
        let spec = CatSpec::special_case(0.0, (a, b), (b, a), 2);
        let (cat, s) = cat_state(&spec, None).unwrap();
        prop_assert!((s - spec.overlap()).abs() <= 1e-10);
        prop_assert!((cat.norm_sqr() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn overlap_outside_range_is_rejected() {
    assert!(matches!(CatSpec::with_overlap(0.0, 0.0, 2), Err(Error::OverlapOutOfRange(_))));
    assert!(matches!(CatSpec::with_overlap(1.5, 0.0, 2), Err(Error::OverlapOutOfRange(_))));
}
