mod common;

use ccilab::alkali::*;
use ccilab::oracle::{a1_bruteforce, a2_bruteforce, cg_lowering, gauss_legendre};
use ccilab::C64;
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn random_polarization(r: &mut ChaCha8Rng) -> CVec3 {
    let v = [cplx(r), cplx(r), cplx(r)];
    let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn random_radial(r: &mut ChaCha8Rng) -> RadialParams {
    let d1: Vec<C64> = (0..2).map(|_| cplx(r)).collect();
    let d2: Vec<C64> = (0..6).map(|_| cplx(r)).collect();
    RadialParams::from_values(&d1, &d2).unwrap()
}

fn jm() -> impl Strategy<Value = (i32, i32)> {
    (0i32..6).prop_flat_map(|j| (Just(j), (0..=j).prop_map(move |k| j - 2 * k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cg_agrees_with_lowering_construction((j1, m1) in jm(), (j2, m2) in jm(), jj in 0i32..10) {
        let mm = m1 + m2;
        prop_assume!(mm.abs() <= jj && (jj + mm) % 2 == 0);
        let a = clebsch_gordan(j1, m1, j2, m2, jj, mm).unwrap();
        let b = cg_lowering(j1, m1, j2, m2, jj, mm);
        prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn cg_columns_are_orthonormal((j1, _) in jm(), (j2, _) in jm(), mm2 in -8i32..=8) {
        let js: Vec<i32> = ((j1 - j2).abs()..=j1 + j2).step_by(2).filter(|&j| mm2.abs() <= j && (j + mm2) % 2 == 0).collect();
        for &ja in &js {
            for &jb in &js {
                let mut s = 0.0;
                for m1 in (-j1..=j1).step_by(2) {
                    let m2 = mm2 - m1;
                    if m2.abs() > j2 || (j2 + m2) % 2 != 0 {
                        continue;
                    }
                    s += clebsch_gordan(j1, m1, j2, m2, ja, mm2).unwrap() * clebsch_gordan(j1, m1, j2, m2, jb, mm2).unwrap();
                }
                let want = if ja == jb { 1.0 } else { 0.0 };
                prop_assert!((s - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn addition_theorem(seed in any::<u64>(), l in 0u32..4) {
        let mut r = rng(seed);
        let (a, b) = (unit3(&mut r), unit3(&mut r));
        let s: C64 = (-(l as i32)..=l as i32).map(|m| spherical_harmonic(l, m, a).conj() * spherical_harmonic(l, m, b)).sum();
        let cosg = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let want = (2 * l + 1) as f64 / (4.0 * std::f64::consts::PI) * ccilab::oracle::legendre_p(l, cosg);
        prop_assert!((s - want).norm() <= 1e-12);
    }

    #[test]
    fn angular_elements_match_bruteforce(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (e, e2) = (random_polarization(&mut r), random_polarization(&mut r));
        let m = if r.random_bool(0.5) { 1 } else { -1 };
        for jp in j_values(1) {
            for mp in (-jp..=jp).step_by(2) {
                let a = angular_a1(Ljm::new(1, jp, mp), Ljm::new(0, 1, m), &e);
                let b = a1_bruteforce(1, jp, mp, 0, 1, m, &e);
                prop_assert!((a - b).norm() <= 1e-12);
            }
        }
        for lp in [0u32, 2] {
            for jp in j_values(lp) {
                for mp in (-jp..=jp).step_by(2) {
                    for jpp in j_values(1) {
                        let a = angular_a2(Ljm::new(lp, jp, mp), (1, jpp), Ljm::new(0, 1, m), &e, &e2);
                        let b = a2_bruteforce(lp as i32, jp, mp, 1, jpp, 0, 1, m, &e, &e2);
                        prop_assert!((a - b).norm() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn amplitudes_follow_polarization_phases(seed in any::<u64>()) {
        let mut r = rng(seed);
        let radial = random_radial(&mut r);
        let g = Geometry::open();
        let phi = phase(&mut r);
        let u = C64::from_polar(1.0, phi);
        let base = spin_amplitudes(&g, &radial).unwrap();
        let mut g2 = g;
        g2.eps_2 = [g.eps_2[0] * u, g.eps_2[1] * u, g.eps_2[2] * u];
        let mut g1 = g;
        g1.eps_1 = [g.eps_1[0] * u, g.eps_1[1] * u, g.eps_1[2] * u];
        let t2s = spin_amplitudes(&g2, &radial).unwrap();
        let t1s = spin_amplitudes(&g1, &radial).unwrap();
        for ms in SPINS {
            for mj in SPINS {
                prop_assert!((t2s.t1(ms, mj) - base.t1(ms, mj) * u).norm() <= 1e-12);
                prop_assert!((t2s.t2(ms, mj) - base.t2(ms, mj)).norm() <= 1e-12);
                prop_assert!((t1s.t2(ms, mj) - base.t2(ms, mj) * u * u).norm() <= 1e-12);
                prop_assert!((t1s.t1(ms, mj) - base.t1(ms, mj)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn configurations_hold_for_any_radial_values(seed in any::<u64>()) {
        let mut r = rng(seed);
        let radial = random_radial(&mut r);
        let open = spin_amplitudes(&Geometry::open(), &radial).unwrap();
        prop_assert!(verify_configuration(&open, Configuration::Open, &VerifyOptions::default()).passed());
        let closed_radial = radial.clone().with_d2_52(C64::new(0.0, 0.0));
        let closed = spin_amplitudes(&Geometry::closed(), &closed_radial).unwrap();
        let opts = VerifyOptions { inputs: &[-1], ..Default::default() };
        let rep = verify_configuration(&closed, Configuration::Closed, &opts);
        prop_assert!(rep.passed(), "{:?}", rep);
        let alt = spin_amplitudes(&Geometry::closed(), &radial.with_alternative_constraint()).unwrap();
        let opts = VerifyOptions { mode: ClosedMode::Alternative, inputs: &[-1], ..Default::default() };
        let rep = verify_configuration(&alt, Configuration::Closed, &opts);
        prop_assert!(rep.passed(), "{:?}", rep);
    }
}

#[test]
fn harmonics_are_orthonormal_on_the_sphere() {
    let nodes = gauss_legendre(12);
    let nphi = 24;
    for l1 in 0..4u32 {
        for l2 in 0..4u32 {
            for m1 in -(l1 as i32)..=l1 as i32 {
                for m2 in -(l2 as i32)..=l2 as i32 {
                    let mut s = C64::new(0.0, 0.0);
                    for &(x, w) in &nodes {
                        let st = (1.0 - x * x).sqrt();
                        for k in 0..nphi {
                            let p = 2.0 * std::f64::consts::PI * k as f64 / nphi as f64;
                            let d = [st * p.cos(), st * p.sin(), x];
                            s += spherical_harmonic(l1, m1, d).conj() * spherical_harmonic(l2, m2, d) * (w * 2.0 * std::f64::consts::PI / nphi as f64);
                        }
                    }
                    let want = if l1 == l2 && m1 == m2 { 1.0 } else { 0.0 };
                    assert!((s - want).norm() < 1e-12, "{l1} {m1} {l2} {m2}: {s}");
                }
            }
        }
    }
}

#[test]
fn radial_toml_round_trip() {
    let mut r = rng(7);
    let radial = random_radial(&mut r);
    let back = RadialParams::from_toml(&radial.to_toml()).unwrap();
    assert_eq!(back, radial);
    assert!(matches!(RadialParams::from_toml("D1 = 3"), Err(ccilab::Error::Parse(_))));
}
