//! Entangled coherent "cat" field and the quantum delayed-choice final state.
//!
//! The cat superposes an open-configuration field `chi_o` (coherent light in
//! modes f1o, f2o) with a closed-configuration field `chi_c` (modes f1c,
//! f2c). Annihilating photons from a coherent branch only rescales it, so
//! both processes leave each branch proportional to itself and the final
//! state lives on `span{chi_o, chi_c}`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::cci::{label_index, Branch, CciState, InputDistribution, Process};
use crate::erasure::{conditioned_ports, ConditionedPorts};
use crate::field::{build_state, EffectiveModeBasis, FieldState, PhotonStatistics};
use crate::linalg::{c, cis};
use crate::observable::FieldObservable;
use crate::{cci::AmplitudeTable, Error, Result, C64};

pub const MODES: [&str; 4] = ["f1o", "f2o", "f1c", "f2c"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatSpec {
    pub open_norms: (f64, f64),
    pub closed_norms: (f64, f64),
    pub gamma_o: f64,
    pub gamma_c: f64,
    pub kappa: f64,
    /// Photon number of the higher-order process.
    pub n: usize,
}

impl CatSpec {
    /// `<chi_o|chi_c> = exp(-sum of squared norms / 2)`.
    pub fn overlap(&self) -> f64 {
        let (a, b) = self.open_norms;
        let (x, y) = self.closed_norms;
        (-0.5 * (a * a + b * b + x * x + y * y)).exp()
    }

    /// Phase locks of the special case at control phase `phi` with input port `-1`.
    pub fn special_case(phi: f64, open_norms: (f64, f64), closed_norms: (f64, f64), n: usize) -> Self {
        Self { open_norms, closed_norms, gamma_o: -phi - FRAC_PI_2, gamma_c: phi, kappa: -2.0 * phi - PI, n }
    }

    /// Special case with all four norms equal and overlap `s`.
    pub fn with_overlap(s: f64, phi: f64, n: usize) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::OverlapOutOfRange(s));
        }
        let a = (-s.ln() / 2.0).sqrt();
        Ok(Self::special_case(phi, (a, a), (a, a), n))
    }

    pub fn basis(&self) -> EffectiveModeBasis {
        EffectiveModeBasis::orthonormal(&MODES)
    }

    /// Normalized branches `(chi_o, chi_c)`.
    pub fn branches(&self, cutoff: Option<usize>) -> Result<(FieldState, FieldState)> {
        let coh = |a: f64| PhotonStatistics::Coherent { amplitude: a, phase: 0.0 };
        let vac = PhotonStatistics::Fock { n: 0 };
        let (a, b) = self.open_norms;
        let (x, y) = self.closed_norms;
        let basis = self.basis();
        let o = build_state(&[coh(a), coh(b), vac, vac], &basis, cutoff)?;
        let cl = build_state(&[vac, vac, coh(x), coh(y)], &basis, cutoff)?;
        Ok((o, cl))
    }
}

/// `(chi_o + chi_c)/sqrt(2(1 + s))` and the overlap from Fock contraction.
pub fn cat_state(spec: &CatSpec, cutoff: Option<usize>) -> Result<(FieldState, f64)> {
    let (o, cl) = spec.branches(cutoff)?;
    let s = o.inner(&cl).re;
    let k = c(1.0 / (2.0 * (1.0 + s)).sqrt(), 0.0);
    Ok((FieldState::combination(&[(k, &o), (k, &cl)])?, s))
}

/// Amplitude tables realizing the phase locks of `spec` for input port `sigma`.
///
/// Amplitudes are scaled so that the open branch weight is `2 |T1o|^2 |f2o|^2 = 2`
/// and the closed branch matches it.
pub fn qdc_tables(spec: &CatSpec, sigma: i8) -> Result<(AmplitudeTable, AmplitudeTable)> {
    let (f1o, f2o) = spec.open_norms;
    let (f1c, f2c) = spec.closed_norms;
    if [f1o, f2o, f1c, f2c].iter().any(|&x| x <= 0.0) {
        return Err(Error::Invalid("phase locks need nonzero norms in every mode".into()));
    }
    let nn = spec.n as i32;
    let t1o = c(1.0 / f2o, 0.0);
    let tno = -cis(spec.gamma_o) * (f2o / f1o.powi(nn)) * t1o;
    let mut open = AmplitudeTable::new(1, 1);
    open.set(Process::One, -sigma, sigma, 0, t1o).set(Process::N, sigma, sigma, 0, tno);
    let t1c = cis(spec.kappa) * (SQRT_2 * f2o / (2.0 * f2c)) * t1o;
    let tnc = cis(spec.gamma_c) * (f2c / f1c.powi(nn)) * t1c;
    let mut closed = AmplitudeTable::new(1, 1);
    closed
        .set(Process::One, 1, sigma, 0, t1c)
        .set(Process::One, -1, sigma, 0, t1c)
        .set(Process::N, 1, sigma, 0, tnc)
        .set(Process::N, -1, sigma, 0, -tnc);
    Ok((open, closed))
}

fn near_zero(x: C64, scale: f64) -> bool {
    x.norm() <= 1e-9 * scale.max(1e-300)
}

/// Configuration and phase-lock checks; the error names the first failure.
pub fn check_qdc_tables(open: &AmplitudeTable, closed: &AmplitudeTable, spec: &CatSpec, input: &InputDistribution) -> Result<()> {
    let (f1o, f2o) = spec.open_norms;
    let (f1c, f2c) = spec.closed_norms;
    let nn = spec.n as i32;
    for sigma in [1i8, -1] {
        if input.p(sigma) == 0.0 {
            continue;
        }
        for nu in 0..open.nu_count(sigma).max(closed.nu_count(sigma)) {
            let so = open.max_abs();
            let sc = closed.max_abs();
            let g = |t: &AmplitudeTable, p, eta| t.get(p, eta, sigma, nu);
            if !near_zero(g(open, Process::One, sigma), so) || !near_zero(g(open, Process::N, -sigma), so) {
                return Err(Error::ConditionViolation(format!("open table biased wrongly for sigma {sigma}")));
            }
            if !near_zero(g(closed, Process::One, 1) - g(closed, Process::One, -1), sc)
                || !near_zero(g(closed, Process::N, 1) + g(closed, Process::N, -1), sc)
            {
                return Err(Error::ConditionViolation(format!("closed table not unbiased for sigma {sigma}")));
            }
            let a = g(open, Process::One, -sigma) * f2o;
            let b = g(open, Process::N, sigma) * f1o.powi(nn);
            if !near_zero(a + cis(-spec.gamma_o) * b, a.norm().max(b.norm())) {
                return Err(Error::ConditionViolation("open phase lock".into()));
            }
            let a = g(closed, Process::One, 1) * f2c;
            let b = g(closed, Process::N, 1) * f1c.powi(nn);
            if !near_zero(a - cis(-spec.gamma_c) * b, a.norm().max(b.norm())) {
                return Err(Error::ConditionViolation("closed phase lock".into()));
            }
            let a = g(closed, Process::One, 1) * (2.0 * f2c);
            let b = g(open, Process::One, -sigma) * (SQRT_2 * f2o);
            if !near_zero(a - cis(spec.kappa) * b, a.norm().max(b.norm())) {
                return Err(Error::ConditionViolation("branch balance".into()));
            }
        }
    }
    Ok(())
}

/// Final state `sum_eta |eta> ⊗ (psi_o(eta) chi_o + psi_c(eta) chi_c)` per input channel.
pub fn qdc_final_state(
    open: &AmplitudeTable,
    closed: &AmplitudeTable,
    spec: &CatSpec,
    input: &InputDistribution,
) -> Result<CciState> {
    check_qdc_tables(open, closed, spec, input)?;
    let (f1o, f2o) = spec.open_norms;
    let (f1c, f2c) = spec.closed_norms;
    let nn = spec.n as i32;
    let (chi_o, chi_c) = spec.branches(None)?;
    let mut branches = Vec::new();
    for sigma in [1i8, -1] {
        let p = input.p(sigma);
        let count = open.nu_count(sigma).max(closed.nu_count(sigma));
        if p == 0.0 || count == 0 {
            continue;
        }
        for nu in 0..count {
            let mut ao = [C64::from(0.0); 2];
            let mut ac = [C64::from(0.0); 2];
            for eta in [1i8, -1] {
                let l = label_index(eta);
                ao[l] = open.get(Process::One, eta, sigma, nu) * f2o + open.get(Process::N, eta, sigma, nu) * f1o.powi(nn);
                ac[l] = closed.get(Process::One, eta, sigma, nu) * f2c + closed.get(Process::N, eta, sigma, nu) * f1c.powi(nn);
            }
            branches.push(Branch { weight: p / count as f64, amps: vec![ao, ac] });
        }
    }
    CciState::from_branches(&[chi_o, chi_c], &branches)
}

/// Label spinors `(psi_o, psi_c)` of the special case at control phase `phi`.
pub fn special_case_spinors(phi: f64) -> ([C64; 2], [C64; 2]) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let o = [c(s, 0.0), c(0.0, 1.0) * cis(-phi) * s];
    let ph = cis(-1.5 * phi);
    let cl = [-ph * (phi / 2.0).cos(), ph * c(0.0, 1.0) * (phi / 2.0).sin()];
    (o, cl)
}

/// The special-case state written directly from its spinors.
pub fn qdc_simple_state(phi: f64, spec: &CatSpec) -> Result<CciState> {
    let (chi_o, chi_c) = spec.branches(None)?;
    let (o, cl) = special_case_spinors(phi);
    CciState::from_branches(&[chi_o, chi_c], &[Branch { weight: 1.0, amps: vec![o, cl] }])
}

/// Squared norm of the unnormalized special-case state.
pub fn qdc_norm(phi: f64, s: f64) -> f64 {
    2.0 - s / SQRT_2 * (phi.cos() + (2.0 * phi).cos() - phi.sin())
}

/// Port statistics sorted by a projector on the field branch.
pub fn morphing_stats(state: &CciState, branch: &FieldObservable) -> Result<ConditionedPorts> {
    conditioned_ports(state, branch)
}
