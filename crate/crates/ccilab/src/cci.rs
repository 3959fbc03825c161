//! Final bipartite state of the interferometer and its complementarity metrics.
//!
//! The label qubit carries the material port `eta = ±1` (index 0 is `+1`).
//! The field part is stored on an orthonormal basis of the span of the
//! field vectors that occur, so `rho` is a `2k x 2k` matrix with index
//! `label * k + j`. Path quantities are read in the frame rotated by
//! `R(pi/4)`, where label `+1` is the one-photon path and `-1` the N-photon path.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::field::{orthonormal_span, FieldState};
use crate::linalg::{c, cis, hermitian_eigen, kron2, trace, trace_norm};
use crate::observable::FieldObservable;
use crate::{Error, Result, C64};

pub fn label_index(eta: i8) -> usize {
    if eta > 0 {
        0
    } else {
        1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Process {
    One,
    N,
}

/// Transition amplitudes `T(process, eta, sigma, nu)` with scalar prefactors folded in.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AmplitudeTable {
    entries: BTreeMap<(Process, i8, i8, usize), C64>,
    nu_counts: [usize; 2],
}

impl AmplitudeTable {
    pub fn new(nu_plus: usize, nu_minus: usize) -> Self {
        Self { entries: BTreeMap::new(), nu_counts: [nu_plus, nu_minus] }
    }

    pub fn set(&mut self, p: Process, eta: i8, sigma: i8, nu: usize, v: C64) -> &mut Self {
        assert!(nu < self.nu_count(sigma), "nu {nu} out of range for sigma {sigma}");
        self.entries.insert((p, eta.signum(), sigma.signum(), nu), v);
        self
    }

    pub fn get(&self, p: Process, eta: i8, sigma: i8, nu: usize) -> C64 {
        self.entries.get(&(p, eta.signum(), sigma.signum(), nu)).copied().unwrap_or(C64::from(0.0))
    }

    pub fn nu_count(&self, sigma: i8) -> usize {
        self.nu_counts[label_index(sigma)]
    }

    pub fn scaled(&self, k: C64) -> Self {
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v *= k;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Closed configuration, unbiased in the label, with the symmetry phase `gamma`:
    /// `T1(+) = T1(-)`, `TN(+) = -TN(-)` and `|chi1| T1(+) = e^{-i gamma} |chiN| TN(+)`.
    pub fn symmetric_unbiased(sigma: i8, norm1: f64, norm_n: f64, gamma: f64) -> Self {
        let mut t = Self::new(1, 1);
        let t1 = c(1.0 / norm1, 0.0);
        let tn = cis(gamma) / norm_n;
        t.set(Process::One, 1, sigma, 0, t1)
            .set(Process::One, -1, sigma, 0, t1)
            .set(Process::N, 1, sigma, 0, tn)
            .set(Process::N, -1, sigma, 0, -tn);
        t
    }

    /// Open configuration: the one-photon process reaches only `-sigma`,
    /// the N-photon process only `sigma`.
    pub fn open(sigma: i8, t1: C64, tn: C64) -> Self {
        let mut t = Self::new(1, 1);
        t.set(Process::One, -sigma, sigma, 0, t1).set(Process::N, sigma, sigma, 0, tn);
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputDistribution {
    p: [f64; 2],
}

impl InputDistribution {
    pub fn new(p_plus: f64, p_minus: f64) -> Result<Self> {
        if p_plus < 0.0 || p_minus < 0.0 || (p_plus + p_minus - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("input probabilities {p_plus}, {p_minus}")));
        }
        Ok(Self { p: [p_plus, p_minus] })
    }

    pub fn only(sigma: i8) -> Self {
        let mut p = [0.0; 2];
        p[label_index(sigma)] = 1.0;
        Self { p }
    }

    pub fn p(&self, sigma: i8) -> f64 {
        self.p[label_index(sigma)]
    }
}

/// One pure component: `amps[f][l]` multiplies `|label l> ⊗ |field f>`.
#[derive(Clone, Debug)]
pub struct Branch {
    pub weight: f64,
    pub amps: Vec<[C64; 2]>,
}

/// Beam-merger rotation `cos|z| 1 + sin|z|/|z| [[0, z], [-z*, 0]]` in the (+1, -1) basis.
pub fn rotation(zeta: C64) -> Matrix2<C64> {
    let r = zeta.norm();
    let s = if r == 0.0 { 1.0 } else { r.sin() / r };
    Matrix2::new(c(r.cos(), 0.0), zeta * s, -zeta.conj() * s, c(r.cos(), 0.0))
}

pub fn merger() -> Matrix2<C64> {
    rotation(c(std::f64::consts::FRAC_PI_4, 0.0))
}

/// Label amplitudes in the path frame mapped back to the label frame.
pub fn path_to_label(path: [C64; 2]) -> [C64; 2] {
    let v = merger().adjoint() * Vector2::new(path[0], path[1]);
    [v[0], v[1]]
}

#[derive(Clone, Debug)]
pub struct CciState {
    basis: Vec<FieldState>,
    rho: DMatrix<C64>,
    ptilde: f64,
    phi: Option<f64>,
    gamma: Option<f64>,
}

impl CciState {
    /// `rho = (1/p) sum_b w_b |psi_b><psi_b|` over the span of `fields`.
    pub fn from_branches(fields: &[FieldState], branches: &[Branch]) -> Result<Self> {
        let refs: Vec<&FieldState> = fields.iter().collect();
        let (basis, coords) = orthonormal_span(&refs)?;
        let k = basis.len();
        let mut rho = DMatrix::<C64>::zeros(2 * k, 2 * k);
        for b in branches {
            if b.weight == 0.0 {
                continue;
            }
            let mut v = DVector::<C64>::zeros(2 * k);
            for (f, amp) in b.amps.iter().enumerate() {
                for l in 0..2 {
                    if amp[l] == C64::from(0.0) {
                        continue;
                    }
                    for j in 0..k {
                        v[l * k + j] += amp[l] * coords[(j, f)];
                    }
                }
            }
            rho += (&v * v.adjoint()) * C64::from(b.weight);
        }
        let ptilde = trace(&rho).re;
        if ptilde.is_nan() || ptilde <= 1e-300 {
            return Err(Error::DegenerateState);
        }
        rho /= C64::from(ptilde);
        let state = Self { basis, rho, ptilde, phi: None, gamma: None };
        state.validate()?;
        Ok(state)
    }

    /// Direct construction from a density matrix on an orthonormal field basis.
    pub fn from_matrix(basis: Vec<FieldState>, rho: DMatrix<C64>) -> Result<Self> {
        if rho.nrows() != 2 * basis.len() || rho.ncols() != rho.nrows() {
            return Err(Error::Invalid("rho dimension must be twice the field basis size".into()));
        }
        let ptilde = trace(&rho).re;
        if ptilde.is_nan() || ptilde <= 1e-300 {
            return Err(Error::DegenerateState);
        }
        let state = Self { basis, rho: rho / C64::from(ptilde), ptilde, phi: None, gamma: None };
        state.validate()?;
        Ok(state)
    }

    fn validate(&self) -> Result<()> {
        let herm = crate::linalg::hermiticity_residual(&self.rho);
        if herm > 1e-10 {
            return Err(Error::Invalid(format!("rho not Hermitian ({herm:.2e})")));
        }
        let (vals, _) = hermitian_eigen(&self.rho);
        if vals.first().is_some_and(|&v| v < -1e-9) {
            return Err(Error::Invalid(format!("rho not positive ({:.2e})", vals[0])));
        }
        Ok(())
    }

    pub fn with_phases(mut self, phi: Option<f64>, gamma: Option<f64>) -> Self {
        self.phi = phi;
        self.gamma = gamma;
        self
    }

    pub fn rho(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn field_basis(&self) -> &[FieldState] {
        &self.basis
    }

    pub fn field_dim(&self) -> usize {
        self.basis.len()
    }

    /// Trace before normalization.
    pub fn ptilde(&self) -> f64 {
        self.ptilde
    }

    pub fn phi(&self) -> Option<f64> {
        self.phi
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    /// `(R ⊗ 1) rho (R ⊗ 1)^dagger` with `R = R(pi/4)`.
    pub fn path_rho(&self) -> DMatrix<C64> {
        let r = kron2(&merger(), &DMatrix::identity(self.field_dim(), self.field_dim()));
        &r * &self.rho * r.adjoint()
    }

    /// Field blocks `(aa, bb, ab)` of a two-label matrix.
    pub fn blocks(m: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>) {
        let k = m.nrows() / 2;
        (
            m.view((0, 0), (k, k)).into_owned(),
            m.view((k, k), (k, k)).into_owned(),
            m.view((0, k), (k, k)).into_owned(),
        )
    }

    /// Reduced label state, 2x2.
    pub fn label_reduced(&self) -> Matrix2<C64> {
        let (aa, bb, ab) = Self::blocks(&self.rho);
        Matrix2::new(trace(&aa), trace(&ab), trace(&ab).conj(), trace(&bb))
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        let (vals, _) = hermitian_eigen(&self.rho);
        *vals.last().unwrap_or(&0.0)
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.largest_eigenvalue() >= 1.0 - tol
    }

    /// `tr[(A ⊗ O) rho]` in the label frame.
    pub fn expectation(&self, label_op: &Matrix2<C64>, field_op: &FieldObservable) -> C64 {
        let o = field_op.compress(&self.basis);
        trace(&(kron2(label_op, &o) * &self.rho))
    }

    /// Population of output port `eta`.
    pub fn port_population(&self, eta: i8) -> f64 {
        let (aa, bb, _) = Self::blocks(&self.rho);
        if eta > 0 {
            trace(&aa).re
        } else {
            trace(&bb).re
        }
    }

    /// Port population jointly with the field outcome `o` (a projector).
    pub fn joint_port_population(&self, eta: i8, o: &FieldObservable) -> f64 {
        let mut p = Matrix2::zeros();
        p[(label_index(eta), label_index(eta))] = C64::from(1.0);
        self.expectation(&p, o).re
    }
}

/// Assemble the post-selected final state from amplitude tables and the outgoing pair.
pub fn assemble_final_state(
    table: &AmplitudeTable,
    input: &InputDistribution,
    chi1: &FieldState,
    chin: &FieldState,
) -> Result<CciState> {
    let mut branches = Vec::new();
    let mut gamma = None;
    for sigma in [1i8, -1] {
        let p = input.p(sigma);
        let count = table.nu_count(sigma);
        if p == 0.0 || count == 0 {
            continue;
        }
        for nu in 0..count {
            let amp1 = [table.get(Process::One, 1, sigma, nu), table.get(Process::One, -1, sigma, nu)];
            let ampn = [table.get(Process::N, 1, sigma, nu), table.get(Process::N, -1, sigma, nu)];
            if gamma.is_none() && amp1[0] != C64::from(0.0) && ampn[0] != C64::from(0.0) {
                gamma = Some((ampn[0] / amp1[0]).arg());
            }
            branches.push(Branch { weight: p / count as f64, amps: vec![amp1, ampn] });
        }
    }
    if branches.is_empty() {
        return Err(Error::DegenerateState);
    }
    let ov = chi1.inner(chin);
    let phi = if ov.norm() > 0.0 { Some(ov.arg()) } else { None };
    Ok(CciState::from_branches(&[chi1.clone(), chin.clone()], &branches)?.with_phases(phi, gamma))
}

/// Complementarity record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub visibility: f64,
    pub predictability: f64,
    pub distinguishability: f64,
    pub coherence: f64,
    /// Pure-state concurrence; `None` for mixed states.
    pub concurrence: Option<f64>,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub phi: Option<f64>,
    pub gamma: Option<f64>,
}

/// Path metrics from the field blocks of the rotated state.
pub fn metrics(state: &CciState) -> Metrics {
    let (aa, bb, ab) = CciState::blocks(&state.path_rho());
    let w_plus = trace(&aa).re;
    let w_minus = trace(&bb).re;
    let visibility = 2.0 * trace(&ab).norm();
    let concurrence = if state.is_pure(1e-9) { Some(pure_concurrence_unchecked(state)) } else { None };
    Metrics {
        visibility,
        predictability: (w_plus - w_minus).abs(),
        distinguishability: trace_norm(&(&aa - &bb)),
        coherence: 2.0 * trace_norm(&ab),
        concurrence,
        lambda_plus: 0.5 * (1.0 + visibility),
        lambda_minus: 0.5 * (1.0 - visibility),
        w_plus,
        w_minus,
        phi: state.phi(),
        gamma: state.gamma(),
    }
}

fn pure_concurrence_unchecked(state: &CciState) -> f64 {
    let m = state.label_reduced();
    let purity = (m * m).trace().re;
    (2.0 * (1.0 - purity)).max(0.0).sqrt()
}

/// `sqrt(2 (1 - tr rho_M^2))` for a pure state.
pub fn pure_concurrence(state: &CciState) -> Result<f64> {
    let top = state.largest_eigenvalue();
    if top < 1.0 - 1e-6 {
        return Err(Error::NotPure(top));
    }
    Ok(pure_concurrence_unchecked(state))
}

/// Concurrence from the Schmidt weights, `sqrt(2 (1 - sum lambda^2))`.
pub fn concurrence(m: &Metrics) -> f64 {
    (2.0 * (1.0 - m.lambda_plus.powi(2) - m.lambda_minus.powi(2))).max(0.0).sqrt()
}

pub fn concurrence_from_visibility(v: f64) -> f64 {
    (1.0 - v * v).max(0.0).sqrt()
}

fn path_z_expectation(state: &CciState, o: &FieldObservable) -> C64 {
    let z = Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0));
    let oc = o.compress(state.field_basis());
    trace(&(kron2(&z, &oc) * state.path_rho()))
}

/// Which-path knowledge extracted by a field projector.
pub fn knowledge(state: &CciState, o: &FieldObservable) -> Result<f64> {
    o.check_projector()?;
    Ok(path_z_expectation(state, o).norm() + path_z_expectation(state, &o.complement()).norm())
}

fn cross_term(state: &CciState, o: &FieldObservable) -> C64 {
    let (_, _, ab) = CciState::blocks(&state.path_rho());
    let oc = o.compress(state.field_basis());
    trace(&(ab * oc))
}

/// Fringe visibility available after sorting by a field projector:
/// the weighted sum of the two subensemble contrasts.
pub fn visibility_given(state: &CciState, o: &FieldObservable) -> Result<f64> {
    o.check_projector()?;
    Ok(2.0 * cross_term(state, o).norm() + 2.0 * cross_term(state, &o.complement()).norm())
}

/// Weight and fringe contrast of the `o = 1` and `o = 0` subensembles.
pub fn conditioned_visibility(state: &CciState, o: &FieldObservable) -> Result<[(f64, Option<f64>); 2]> {
    o.check_projector()?;
    let one = |obs: &FieldObservable| {
        let w = state.expectation(&Matrix2::identity(), obs).re;
        let v = if w > 1e-14 { Some(2.0 * cross_term(state, obs).norm() / w) } else { None };
        (w, v)
    };
    Ok([one(o), one(&o.complement())])
}

/// Schmidt decomposition of a pure state in the label frame.
#[derive(Clone, Debug)]
pub struct Schmidt {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub m_plus: Vector2<C64>,
    pub m_minus: Vector2<C64>,
    pub r_plus: FieldState,
    /// Absent when `lambda_minus` vanishes.
    pub r_minus: Option<FieldState>,
}

impl Schmidt {
    /// `sum sqrt(lambda) |m> ⊗ |r>` as coordinates on `basis`, label-major.
    pub fn reconstruct(&self, basis: &[FieldState]) -> DVector<C64> {
        let k = basis.len();
        let mut v = DVector::zeros(2 * k);
        let mut add = |lam: f64, m: &Vector2<C64>, r: &FieldState| {
            for l in 0..2 {
                for (j, e) in basis.iter().enumerate() {
                    v[l * k + j] += lam.sqrt() * m[l] * e.inner(r);
                }
            }
        };
        add(self.lambda_plus, &self.m_plus, &self.r_plus);
        if let Some(r) = &self.r_minus {
            add(self.lambda_minus, &self.m_minus, r);
        }
        v
    }
}

/// Numerical Schmidt decomposition by singular values of the coefficient matrix.
pub fn schmidt(state: &CciState) -> Result<Schmidt> {
    let (vals, vecs) = hermitian_eigen(state.rho());
    let top = *vals.last().ok_or(Error::DegenerateState)?;
    if top < 1.0 - 1e-6 {
        return Err(Error::NotPure(top));
    }
    let k = state.field_dim();
    let psi = vecs.column(vals.len() - 1);
    let coeff = DMatrix::from_fn(2, k, |l, j| psi[l * k + j]);
    let svd = coeff.svd(true, true);
    let u = svd.u.ok_or(Error::DegenerateState)?;
    let vt = svd.v_t.ok_or(Error::DegenerateState)?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let field_of = |a: usize| {
        let parts: Vec<(C64, &FieldState)> = state.field_basis().iter().enumerate().map(|(j, e)| (vt[(a, j)], e)).collect();
        FieldState::combination(&parts)
    };
    let a0 = order[0];
    let lp = svd.singular_values[a0].powi(2);
    let (lm, m_minus, r_minus) = if order.len() > 1 && svd.singular_values[order[1]] > 1e-12 {
        let a1 = order[1];
        (svd.singular_values[a1].powi(2), Vector2::new(u[(0, a1)], u[(1, a1)]), Some(field_of(a1)?))
    } else {
        let m = Vector2::new(-u[(1, a0)].conj(), u[(0, a0)].conj());
        (0.0, m, None)
    };
    Ok(Schmidt {
        lambda_plus: lp,
        lambda_minus: lm,
        m_plus: Vector2::new(u[(0, a0)], u[(1, a0)]),
        m_minus,
        r_plus: field_of(a0)?,
        r_minus,
    })
}

/// Recipe for the symmetric pure state `R^dagger (|+1>|chi1^> - e^{i gamma}|-1>|chiN^>)/sqrt2`.
#[derive(Clone, Debug)]
pub struct SymmetricCci {
    chi1: FieldState,
    chin: FieldState,
    gamma: f64,
}

impl SymmetricCci {
    pub fn new(chi1: &FieldState, chin: &FieldState, gamma: f64) -> Result<Self> {
        Ok(Self { chi1: chi1.normalized()?, chin: chin.normalized()?, gamma })
    }

    pub fn chi1_hat(&self) -> &FieldState {
        &self.chi1
    }

    pub fn chin_hat(&self) -> &FieldState {
        &self.chin
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Normalized overlap `<chi1^|chiN^>`.
    pub fn overlap(&self) -> C64 {
        self.chi1.inner(&self.chin)
    }

    pub fn visibility(&self) -> f64 {
        self.overlap().norm().min(1.0)
    }

    pub fn phi(&self) -> f64 {
        self.overlap().arg()
    }

    pub fn state(&self) -> Result<CciState> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a1 = path_to_label([c(s, 0.0), c(0.0, 0.0)]);
        let an = path_to_label([c(0.0, 0.0), -cis(self.gamma) * s]);
        let st = CciState::from_branches(
            &[self.chi1.clone(), self.chin.clone()],
            &[Branch { weight: 1.0, amps: vec![a1, an] }],
        )?;
        Ok(st.with_phases(Some(self.phi()), Some(self.gamma)))
    }

    /// Closed-form Schmidt pieces; these stay well defined at zero visibility.
    pub fn schmidt(&self) -> Result<Schmidt> {
        let v = self.visibility();
        let phi = self.phi();
        let lp = 0.5 * (1.0 + v);
        let lm = 0.5 * (1.0 - v);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = |sign: f64| {
            let path = [cis(-phi) * (sign * s), -cis(self.gamma) * s];
            let l = path_to_label(path);
            Vector2::new(l[0], l[1])
        };
        let r = |sign: f64, lam: f64| {
            FieldState::combination(&[(cis(phi) * (sign / (2.0 * lam.sqrt())), &self.chi1), (c(1.0 / (2.0 * lam.sqrt()), 0.0), &self.chin)])
        };
        let r_minus = if lm > 1e-14 { Some(r(-1.0, lm)?) } else { None };
        Ok(Schmidt { lambda_plus: lp, lambda_minus: lm, m_plus: m(1.0), m_minus: m(-1.0), r_plus: r(1.0, lp)?, r_minus })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{outgoing_pair, EffectiveModeBasis, PhotonStatistics};
    use std::f64::consts::PI;

    fn fock_pair() -> (FieldState, FieldState) {
        let b = EffectiveModeBasis::orthonormal(&["f1", "f2"]);
        outgoing_pair(PhotonStatistics::Fock { n: 2 }, PhotonStatistics::Fock { n: 1 }, 2, &b, None).unwrap()
    }

    fn coherent_pair(phase1: f64) -> (FieldState, FieldState) {
        let b = EffectiveModeBasis::orthonormal(&["f1", "f2"]);
        outgoing_pair(
            PhotonStatistics::Coherent { amplitude: 0.9, phase: phase1 },
            PhotonStatistics::Coherent { amplitude: 1.2, phase: 0.0 },
            2,
            &b,
            None,
        )
        .unwrap()
    }

    #[test]
    fn rotation_examples() {
        let id = rotation(c(0.0, 0.0));
        assert!((id - Matrix2::identity()).norm() < 1e-15);
        let r = merger();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = Matrix2::new(c(s, 0.0), c(s, 0.0), c(-s, 0.0), c(s, 0.0));
        assert!((r - want).norm() < 1e-15);
        let z = c(0.3, -0.7);
        assert!((rotation(z) * rotation(-z) - Matrix2::identity()).norm() < 1e-14);
    }

    #[test]
    fn open_configuration_has_flat_ports() {
        let (a, b) = fock_pair();
        let t = AmplitudeTable::open(1, c(1.0, 0.0), c(1.0 / 2f64.sqrt(), 0.0));
        let st = assemble_final_state(&t, &InputDistribution::only(1), &a, &b).unwrap();
        assert!((st.port_population(1) - 0.5).abs() < 1e-14);
        assert!((st.port_population(-1) - 0.5).abs() < 1e-14);
        let off = st.label_reduced()[(0, 1)];
        assert!(off.norm() < 1e-14);
    }

    #[test]
    fn proportional_pair_gives_full_fringes() {
        for &(ph, gamma) in &[(0.0, 0.0), (0.4, 1.1), (-1.3, 2.0)] {
            let (a, b) = coherent_pair(ph);
            let t = AmplitudeTable::symmetric_unbiased(1, a.norm(), b.norm(), gamma);
            let st = assemble_final_state(&t, &InputDistribution::only(1), &a, &b).unwrap();
            let phi = st.phi().unwrap();
            for eta in [1i8, -1] {
                let want = 0.5 * (1.0 + eta as f64 * (phi + gamma).cos());
                assert!((st.port_population(eta) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn single_path() {
        let (a, b) = fock_pair();
        let mut t = AmplitudeTable::new(1, 0);
        t.set(Process::One, 1, 1, 0, c(1.0, 0.0)).set(Process::One, -1, 1, 0, c(1.0, 0.0));
        let st = assemble_final_state(&t, &InputDistribution::only(1), &a, &b).unwrap();
        let m = metrics(&st);
        assert!(m.visibility < 1e-14);
        assert!((m.predictability - 1.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_fock_metrics() {
        let (a, b) = fock_pair();
        let st = SymmetricCci::new(&a, &b, 0.3).unwrap().state().unwrap();
        let m = metrics(&st);
        assert!(m.predictability < 1e-14 && m.visibility < 1e-14);
        assert!((m.distinguishability - 1.0).abs() < 1e-12);
        assert!((m.coherence - 1.0).abs() < 1e-12);
        assert!((m.concurrence.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_coherent_metrics() {
        let (a, b) = coherent_pair(0.2);
        let st = SymmetricCci::new(&a, &b, 0.0).unwrap().state().unwrap();
        let m = metrics(&st);
        assert!((m.visibility - 1.0).abs() < 1e-9);
        assert!(m.distinguishability < 1e-6);
    }

    #[test]
    fn table_and_recipe_agree() {
        let (a, b) = coherent_pair(0.7);
        let b = FieldState::combination(&[(c(0.6, 0.0), &b), (c(0.0, 0.8 * b.norm()), &a.normalized().unwrap())]).unwrap();
        let gamma = 0.9;
        let t = AmplitudeTable::symmetric_unbiased(-1, a.norm(), b.norm(), gamma);
        let from_table = assemble_final_state(&t, &InputDistribution::only(-1), &a, &b).unwrap();
        let recipe = SymmetricCci::new(&a, &b, gamma).unwrap().state().unwrap();
        let m1 = metrics(&from_table);
        let m2 = metrics(&recipe);
        assert!((m1.visibility - m2.visibility).abs() < 1e-12);
        assert!((from_table.gamma().unwrap() - gamma).abs() < 1e-12);
        for eta in [1i8, -1] {
            assert!((from_table.port_population(eta) - recipe.port_population(eta)).abs() < 1e-12);
        }
    }

    #[test]
    fn schmidt_examples() {
        let (a, b) = fock_pair();
        let sym = SymmetricCci::new(&a, &b, 0.0).unwrap();
        let sc = sym.schmidt().unwrap();
        assert!((sc.lambda_plus - 0.5).abs() < 1e-15);
        let (a, b) = coherent_pair(0.0);
        let sc = SymmetricCci::new(&a, &b, 0.0).unwrap().schmidt().unwrap();
        assert!((sc.lambda_plus - 1.0).abs() < 1e-9 && sc.lambda_minus < 1e-9);
    }

    #[test]
    fn closed_form_schmidt_reconstructs() {
        let base = EffectiveModeBasis::orthonormal(&["f1", "f2"]);
        let e1 = FieldState::fock(&base, &[1, 0]).unwrap();
        let e2 = FieldState::fock(&base, &[0, 1]).unwrap();
        // overlap 0.6 e^{i 0.5}
        let chin = FieldState::combination(&[(cis(0.5) * 0.6, &e1), (c(0.8, 0.0), &e2)]).unwrap();
        let sym = SymmetricCci::new(&e1, &chin, 1.2).unwrap();
        let st = sym.state().unwrap();
        let sc = sym.schmidt().unwrap();
        assert!((sc.lambda_plus - 0.8).abs() < 1e-12 && (sc.lambda_minus - 0.2).abs() < 1e-12);
        let v = sc.reconstruct(st.field_basis());
        let rho = &v * v.adjoint();
        assert!(crate::linalg::max_abs_diff(&rho, st.rho()) < 1e-12);
        let r_minus = sc.r_minus.as_ref().unwrap();
        assert!(sc.r_plus.inner(r_minus).norm() < 1e-12);
        assert!((r_minus.norm_sqr() - 1.0).abs() < 1e-12);
        let num = schmidt(&st).unwrap();
        assert!((num.lambda_plus - 0.8).abs() < 1e-10);
    }

    #[test]
    fn not_pure_rejected() {
        let (a, b) = fock_pair();
        let t = AmplitudeTable::open(1, c(1.0, 0.0), c(1.0, 0.0));
        let mut both = t.clone();
        both = {
            let mut x = AmplitudeTable::new(1, 1);
            for s in [1i8, -1] {
                x.set(Process::One, -s, s, 0, both.get(Process::One, -1, 1, 0))
                    .set(Process::N, s, s, 0, both.get(Process::N, 1, 1, 0));
            }
            x
        };
        let st = assemble_final_state(&both, &InputDistribution::new(0.5, 0.5).unwrap(), &a, &b).unwrap();
        assert!(matches!(schmidt(&st), Err(Error::NotPure(_))));
        assert!(matches!(pure_concurrence(&st), Err(Error::NotPure(_))));
    }

    #[test]
    fn knowledge_examples() {
        let (a, b) = fock_pair();
        let st = SymmetricCci::new(&a, &b, 0.0).unwrap().state().unwrap();
        let m = metrics(&st);
        let k = knowledge(&st, &FieldObservable::identity()).unwrap();
        assert!((k - m.predictability).abs() < 1e-14);
        let pn = FieldObservable::projector_onto(&b).unwrap();
        assert!((knowledge(&st, &pn).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_when_nothing_arrives() {
        let (a, b) = fock_pair();
        let t = AmplitudeTable::new(1, 1);
        assert!(matches!(assemble_final_state(&t, &InputDistribution::only(1), &a, &b), Err(Error::DegenerateState)));
    }

    #[test]
    fn half_turn_rotation_swaps_labels() {
        let r = rotation(c(PI / 2.0, 0.0));
        assert!((r[(0, 1)] - c(1.0, 0.0)).norm() < 1e-15);
    }
}
