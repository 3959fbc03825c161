#![allow(dead_code)]

use ccilab::cci::{assemble_final_state, AmplitudeTable, CciState, InputDistribution, Process, SymmetricCci};
use ccilab::field::{outgoing_pair, EffectiveModeBasis, FieldState, PhotonStatistics};
use ccilab::observable::FieldObservable;
use ccilab::C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn two_modes() -> EffectiveModeBasis {
    EffectiveModeBasis::orthonormal(&["f1", "f2"])
}

pub fn cplx(r: &mut ChaCha8Rng) -> C64 {
    C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

pub fn phase(r: &mut ChaCha8Rng) -> f64 {
    r.random_range(-std::f64::consts::PI..std::f64::consts::PI)
}

pub fn stats_mode1(r: &mut ChaCha8Rng, n: usize) -> PhotonStatistics {
    match r.random_range(0..3) {
        0 => PhotonStatistics::Fock { n: r.random_range(n..=6) },
        1 => PhotonStatistics::Coherent { amplitude: r.random_range(0.3..1.5), phase: phase(r) },
        _ => PhotonStatistics::SqueezedVacuum { rho: r.random_range(0.1..0.9) },
    }
}

pub fn stats_mode2(r: &mut ChaCha8Rng) -> PhotonStatistics {
    match r.random_range(0..3) {
        0 => PhotonStatistics::Fock { n: r.random_range(1..=4) },
        1 => PhotonStatistics::Coherent { amplitude: r.random_range(0.3..1.5), phase: phase(r) },
        _ => PhotonStatistics::SqueezedVacuum { rho: r.random_range(0.1..0.9) },
    }
}

/// Random outgoing pair from random photon statistics, `N` in {2, 3}.
pub fn random_pair(r: &mut ChaCha8Rng) -> (FieldState, FieldState) {
    let n = r.random_range(2..=3);
    let g1 = stats_mode1(r, n);
    let g2 = stats_mode2(r);
    outgoing_pair(g1, g2, n, &two_modes(), None).unwrap()
}

/// Pair with a prescribed overlap `v e^{i phi}` between normalized states.
pub fn pair_with_overlap(v: f64, phi: f64) -> (FieldState, FieldState) {
    let b = two_modes();
    let a = FieldState::fock(&b, &[2, 0]).unwrap();
    let o = FieldState::fock(&b, &[0, 1]).unwrap();
    let w = (1.0 - v * v).max(0.0).sqrt();
    let chin = FieldState::combination(&[(C64::from_polar(v, phi), &a), (C64::new(w, 0.0), &o)]).unwrap();
    (a, chin)
}

pub fn random_symmetric(r: &mut ChaCha8Rng) -> SymmetricCci {
    let (a, b) = random_pair(r);
    SymmetricCci::new(&a, &b, phase(r)).unwrap()
}

/// Arbitrary tables and input distribution on a random pair.
pub fn random_state(r: &mut ChaCha8Rng) -> CciState {
    let (a, b) = random_pair(r);
    let (np, nm) = (r.random_range(1..=2), r.random_range(0..=2));
    let mut t = AmplitudeTable::new(np, nm);
    for (sigma, count) in [(1i8, np), (-1i8, nm)] {
        for nu in 0..count {
            for eta in [1i8, -1] {
                t.set(Process::One, eta, sigma, nu, cplx(r));
                t.set(Process::N, eta, sigma, nu, cplx(r));
            }
        }
    }
    let p = r.random_range(0.05..0.95);
    let input = if nm == 0 { InputDistribution::only(1) } else { InputDistribution::new(p, 1.0 - p).unwrap() };
    assemble_final_state(&t, &input, &a, &b).unwrap()
}

/// Projector onto a random vector of the state's field span.
pub fn random_projector(r: &mut ChaCha8Rng, state: &CciState) -> FieldObservable {
    let basis = state.field_basis();
    let parts: Vec<(C64, &FieldState)> = basis.iter().map(|e| (cplx(r), e)).collect();
    let v = FieldState::combination(&parts).unwrap();
    FieldObservable::projector_onto(&v).unwrap()
}

/// Random unit 3-vector.
pub fn unit3(r: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}
