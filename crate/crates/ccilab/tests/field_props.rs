mod common;

use ccilab::field::{build_state, chi_overlap_series, outgoing_pair, EffectiveModeBasis, FieldState, PhotonStatistics};
use ccilab::oracle::dense_overlap;
use ccilab::C64;
use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn stats() -> impl Strategy<Value = PhotonStatistics> {
    prop_oneof![
        (0usize..6).prop_map(|n| PhotonStatistics::Fock { n }),
        (0.05f64..2.0, -3.0f64..3.0).prop_map(|(amplitude, phase)| PhotonStatistics::Coherent { amplitude, phase }),
        (0.05f64..1.0).prop_map(|rho| PhotonStatistics::SqueezedVacuum { rho }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn single_mode_states_are_normalized(g in stats()) {
        let b = EffectiveModeBasis::orthonormal(&["f"]);
        let s = build_state(&[g], &b, None).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() <= 2e-10);
        prop_assert!(s.residual() <= 1e-10);
    }

    #[test]
    fn overlap_series_matches_contraction(g1 in stats(), g2 in stats(), n in 2usize..4) {
        let pair = outgoing_pair(g1, g2, n, &two_modes(), None);
        let series = chi_overlap_series(g1, g2, n, None).unwrap();
        let (a, b) = pair.unwrap();
        let direct = dense_overlap(&a, &b);
        prop_assert!((series.raw - direct).norm() <= 1e-9 * (1.0 + direct.norm()));
        prop_assert!((series.norm1_sqr - a.norm_sqr()).abs() <= 1e-9 * (1.0 + a.norm_sqr()));
        if let Some(v) = series.normalized {
            prop_assert!(v.norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn inner_product_is_hermitian(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = random_pair(&mut r);
        let (c, _) = random_pair(&mut r);
        prop_assert!((a.inner(&b) - b.inner(&a).conj()).norm() <= 1e-12 * (1.0 + a.norm() * b.norm()));
        let k = cplx(&mut r);
        let lin = FieldState::combination(&[(k, &b), (C64::new(1.0, 0.0), &c)]).unwrap();
        let want = a.inner(&b) * k + a.inner(&c);
        prop_assert!((a.inner(&lin) - want).norm() <= 1e-10 * (1.0 + want.norm()));
    }

    #[test]
    fn orthonormalize_is_idempotent(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let m = DMatrix::from_fn(n, n + 1, |_, _| cplx(&mut r));
        let gram = &m * m.adjoint();
        let labels: Vec<String> = (0..n).map(|i| format!("m{i}")).collect();
        let basis = EffectiveModeBasis::new(labels, gram.clone()).unwrap();
        let (ortho, c) = basis.orthonormalize();
        let check = c.adjoint() * &gram * &c;
        let id = DMatrix::<C64>::identity(ortho.len(), ortho.len());
        prop_assert!((check - &id).norm() <= 1e-8);
        let (again, c2) = ortho.orthonormalize();
        prop_assert_eq!(again.labels(), ortho.labels());
        prop_assert!((c2 - id).norm() == 0.0);
    }

    #[test]
    fn truncation_residual_shrinks_with_cutoff(amp in 0.1f64..2.0) {
        let g = PhotonStatistics::Coherent { amplitude: amp, phase: 0.0 };
        let mut last = f64::INFINITY;
        for c in [4usize, 8, 16, 32] {
            let r = g.truncation_residual(0, c);
            prop_assert!(r <= last + 1e-15);
            last = r;
        }
    }
}

#[test]
fn requested_cutoff_too_small_is_an_error() {
    let g = PhotonStatistics::Coherent { amplitude: 3.0, phase: 0.0 };
    let b = EffectiveModeBasis::orthonormal(&["f"]);
    assert!(matches!(build_state(&[g], &b, Some(3)), Err(ccilab::Error::CutoffTooSmall { .. })));
}
