//! CHSH tests between the interferometer label and the radiation field.
//!
//! Label observables are 2x2 matrices in the (+1, -1) label frame; field
//! observables are finite-rank dichotomous operators on the field span.

use nalgebra::{DMatrix, Matrix2, Matrix3};

use crate::cci::{CciState, SymmetricCci};
use crate::delayed::CatSpec;
use crate::erasure::optimal_ww_observable;
use crate::linalg::{c, hermitian_eigen, kron2, trace};
use crate::observable::{FieldObservable, ObservableKind};
use crate::{Error, Result, C64};

/// Pauli matrix `k` in {1, 2, 3}; anything else gives the identity.
pub fn pseudospin(k: usize) -> Matrix2<C64> {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match k {
        1 => Matrix2::new(z, one, one, z),
        2 => Matrix2::new(z, c(0.0, -1.0), c(0.0, 1.0), z),
        3 => Matrix2::new(one, z, z, -one),
        _ => Matrix2::identity(),
    }
}

/// `n . sigma` for a real unit vector.
pub fn spin_along(n: [f64; 3]) -> Matrix2<C64> {
    pseudospin(1) * c(n[0], 0.0) + pseudospin(2) * c(n[1], 0.0) + pseudospin(3) * c(n[2], 0.0)
}

#[derive(Clone, Debug)]
pub struct BellSetting {
    pub o_m: Matrix2<C64>,
    pub o_m_prime: Matrix2<C64>,
    pub o_r: FieldObservable,
    pub o_r_prime: FieldObservable,
}

impl BellSetting {
    /// Every observable squares to one (the field ones on their support).
    pub fn validate(&self) -> Result<()> {
        for m in [&self.o_m, &self.o_m_prime] {
            let r = (m * m - Matrix2::identity()).norm().max((m - m.adjoint()).norm());
            if r > 1e-9 {
                return Err(Error::NotDichotomous(r));
            }
        }
        self.o_r.check_dichotomous()?;
        self.o_r_prime.check_dichotomous()
    }
}

/// `<O_M O_R + O_M' O_R + O_M O_R' - O_M' O_R'>`.
pub fn bell_expectation(state: &CciState, s: &BellSetting) -> f64 {
    let e = |m: &Matrix2<C64>, r: &FieldObservable| state.expectation(m, r).re;
    e(&s.o_m, &s.o_r) + e(&s.o_m_prime, &s.o_r) + e(&s.o_m, &s.o_r_prime) - e(&s.o_m_prime, &s.o_r_prime)
}

/// Largest CHSH value over local ±1 assignments.
pub fn lhv_bound() -> f64 {
    let mut best = f64::MIN;
    for bits in 0u8..16 {
        let v = |k: u8| if bits >> k & 1 == 1 { 1.0 } else { -1.0 };
        let (m, mp, r, rp) = (v(0), v(1), v(2), v(3));
        best = best.max(m * r + mp * r + m * rp - mp * rp);
    }
    best
}

/// Setting that reaches `2 sqrt(2 - V^2)` on the symmetric state.
pub fn erasure_setting(sym: &SymmetricCci) -> Result<BellSetting> {
    let v = sym.visibility();
    if v >= 1.0 - 1e-9 {
        return Err(Error::Indistinguishable);
    }
    let sch = sym.schmidt()?;
    let r_minus = sch.r_minus.as_ref().ok_or(Error::Indistinguishable)?;
    let o_r = FieldObservable::new(
        0.0,
        vec![(c(1.0, 0.0), sch.r_plus.clone(), sch.r_plus.clone()), (c(-1.0, 0.0), r_minus.clone(), r_minus.clone())],
        ObservableKind::Dichotomous,
    );
    let o_r_prime = optimal_ww_observable(sym.chi1_hat(), sym.chin_hat())?;
    let a = sym.phi() + sym.gamma();
    let w = (1.0 - v * v).sqrt();
    let norm = (2.0 - v * v).sqrt();
    let o_m = spin_along([-w / norm, -a.sin() / norm, a.cos() / norm]);
    let o_m_prime = spin_along([w / norm, -a.sin() / norm, a.cos() / norm]);
    Ok(BellSetting { o_m, o_m_prime, o_r, o_r_prime })
}

/// Best CHSH value of the delayed-choice state at control phase `phi` and overlap `s`.
pub fn qdc_closed_form(phi: f64, s: f64) -> f64 {
    let d = crate::delayed::qdc_norm(phi, s);
    2.0 * (1.0 + (1.0 - s * s) * (2.0 + (2.0 * phi).sin()) / (d * d)).sqrt()
}

/// The same at `phi = 0`, `2 sqrt(6 - 4 sqrt2 s) / (2 - sqrt2 s)`.
pub fn qdc_phi0(s: f64) -> f64 {
    let r2 = std::f64::consts::SQRT_2;
    2.0 * (6.0 - 4.0 * r2 * s).sqrt() / (2.0 - r2 * s)
}

/// Explicit setting for the delayed-choice state at `phi = 0`.
pub fn qdc_setting(spec: &CatSpec) -> Result<BellSetting> {
    let s = spec.overlap();
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::OverlapOutOfRange(s));
    }
    let (o, cl) = spec.branches(None)?;
    let k = 1.0 / (1.0 - s * s);
    let o_r = FieldObservable::new(
        0.0,
        vec![(c(-s * k, 0.0), cl.clone(), cl.clone()), (c(-s * k, 0.0), o.clone(), o.clone()), (c(k, 0.0), cl.clone(), o.clone()), (c(k, 0.0), o.clone(), cl.clone())],
        ObservableKind::Dichotomous,
    );
    let q = 1.0 / (1.0 - s * s).sqrt();
    let o_r_prime = FieldObservable::new(0.0, vec![(c(q, 0.0), cl.clone(), cl), (c(-q, 0.0), o.clone(), o)], ObservableKind::Dichotomous);
    let r2 = std::f64::consts::SQRT_2;
    let w = (1.0 - s * s).sqrt();
    let norm = (6.0 - 4.0 * r2 * s).sqrt();
    let o_m = spin_along([0.0, (-r2 + s - w) / norm, (-r2 + s + w) / norm]);
    let o_m_prime = spin_along([0.0, (-r2 + s + w) / norm, (-r2 + s - w) / norm]);
    Ok(BellSetting { o_m, o_m_prime, o_r, o_r_prime })
}

/// Maximal CHSH value over all settings for a state whose field span is two-dimensional.
pub fn chsh_max(state: &CciState) -> Result<f64> {
    if state.field_dim() != 2 {
        return Err(Error::Invalid(format!("field span has dimension {}, need 2", state.field_dim())));
    }
    let mut t = Matrix3::<f64>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let f = pseudospin(j + 1);
            let fd = DMatrix::from_fn(2, 2, |a, b| f[(a, b)]);
            t[(i, j)] = trace(&(kron2(&pseudospin(i + 1), &fd) * state.rho())).re;
        }
    }
    let m = t.transpose() * t;
    let md = DMatrix::from_fn(3, 3, |a, b| C64::from(m[(a, b)]));
    let (vals, _) = hermitian_eigen(&md);
    Ok(2.0 * (vals[1] + vals[2]).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cci::InputDistribution;
    use crate::delayed::{qdc_final_state, qdc_tables};
    use crate::field::{outgoing_pair, EffectiveModeBasis, PhotonStatistics};

    #[test]
    fn lhv_is_two() {
        assert_eq!(lhv_bound(), 2.0);
    }

    #[test]
    fn erasure_setting_reaches_closed_form() {
        let b = EffectiveModeBasis::orthonormal(&["f1", "f2"]);
        for (rho, gamma) in [(0.2, 0.3), (0.6, -1.2), (1.1, 2.5)] {
            let (chi1, chin) = outgoing_pair(
                PhotonStatistics::SqueezedVacuum { rho },
                PhotonStatistics::Coherent { amplitude: 1.1, phase: 0.0 },
                2,
                &b,
                None,
            )
            .unwrap();
            let sym = SymmetricCci::new(&chi1, &chin, gamma).unwrap();
            let set = erasure_setting(&sym).unwrap();
            set.validate().unwrap();
            let v = sym.visibility();
            let got = bell_expectation(&sym.state().unwrap(), &set);
            assert!((got - 2.0 * (2.0 - v * v).sqrt()).abs() < 1e-9, "{got} {v}");
        }
    }

    #[test]
    fn qdc_phi0_setting_matches_family() {
        for s in [0.05, 0.3, 0.7, 0.95] {
            let spec = CatSpec::with_overlap(s, 0.0, 2).unwrap();
            let (o, cl) = qdc_tables(&spec, -1).unwrap();
            let st = qdc_final_state(&o, &cl, &spec, &InputDistribution::only(-1)).unwrap();
            let set = qdc_setting(&spec).unwrap();
            set.validate().unwrap();
            let got = bell_expectation(&st, &set);
            assert!((got - qdc_phi0(s)).abs() < 1e-9, "{s}: {got} vs {}", qdc_phi0(s));
            assert!((chsh_max(&st).unwrap() - qdc_closed_form(0.0, s)).abs() < 1e-9);
        }
    }

    #[test]
    fn qdc_closed_form_is_the_optimum() {
        for &(phi, s) in &[(0.4, 0.3), (-1.3, 0.6), (2.8, 0.05), (1.0, 0.99)] {
            let spec = CatSpec::with_overlap(s, phi, 2).unwrap();
            let (o, cl) = qdc_tables(&spec, -1).unwrap();
            let st = qdc_final_state(&o, &cl, &spec, &InputDistribution::only(-1)).unwrap();
            assert!((chsh_max(&st).unwrap() - qdc_closed_form(phi, s)).abs() < 1e-9);
        }
    }

    #[test]
    fn overlap_out_of_range() {
        let spec = CatSpec::special_case(0.0, (0.0, 0.0), (0.0, 0.0), 2);
        assert!(matches!(qdc_setting(&spec), Err(Error::OverlapOutOfRange(_))));
    }
}
