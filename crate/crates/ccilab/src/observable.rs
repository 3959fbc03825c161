//! Finite-rank operators on the field, `a·1 + sum_k c_k |u_k><v_k|`.
//!
//! Every field measurement in the lab is of this shape: projectors onto a
//! few states, dichotomous observables on the span of the outgoing pair,
//! and the threshold observable `2|f><f| - 1`. Compressing onto the span
//! that carries a bipartite state gives exact expectation values.

use nalgebra::DMatrix;

use crate::field::{orthonormal_span, FieldState};
use crate::linalg::{hermitian_eigen, max_abs_diff};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservableKind {
    Projector,
    Dichotomous,
    General,
}

#[derive(Clone, Debug)]
pub struct FieldObservable {
    identity: f64,
    terms: Vec<(C64, FieldState, FieldState)>,
    kind: ObservableKind,
}

impl FieldObservable {
    pub fn new(identity: f64, terms: Vec<(C64, FieldState, FieldState)>, kind: ObservableKind) -> Self {
        Self { identity, terms, kind }
    }

    pub fn identity() -> Self {
        Self { identity: 1.0, terms: Vec::new(), kind: ObservableKind::Projector }
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn projector_onto(psi: &FieldState) -> Result<Self> {
        if psi.norm_sqr() <= 0.0 {
            return Err(Error::ZeroTarget);
        }
        let c = C64::from(1.0 / psi.norm_sqr());
        Ok(Self { identity: 0.0, terms: vec![(c, psi.clone(), psi.clone())], kind: ObservableKind::Projector })
    }

    /// `sum_ij m_ij |e_i><e_j|` over orthonormal `vectors`, zero on the complement.
    pub fn from_span(vectors: &[FieldState], m: &DMatrix<C64>, kind: ObservableKind) -> Self {
        let mut terms = Vec::new();
        for i in 0..vectors.len() {
            for j in 0..vectors.len() {
                if m[(i, j)] != C64::from(0.0) {
                    terms.push((m[(i, j)], vectors[i].clone(), vectors[j].clone()));
                }
            }
        }
        Self { identity: 0.0, terms, kind }
    }

    pub fn kind(&self) -> ObservableKind {
        self.kind
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.identity
    }

    /// `1 - O`.
    pub fn complement(&self) -> Self {
        Self {
            identity: 1.0 - self.identity,
            terms: self.terms.iter().map(|(c, u, v)| (-c, u.clone(), v.clone())).collect(),
            kind: self.kind,
        }
    }

    /// Matrix elements `<e_i|O|e_j>` on an orthonormal set.
    pub fn compress(&self, basis: &[FieldState]) -> DMatrix<C64> {
        let k = basis.len();
        let mut m = DMatrix::from_fn(k, k, |i, j| if i == j { C64::from(self.identity) } else { C64::from(0.0) });
        for (c, u, v) in &self.terms {
            let left: Vec<C64> = basis.iter().map(|e| e.inner(u)).collect();
            let right: Vec<C64> = basis.iter().map(|e| v.inner(e)).collect();
            for i in 0..k {
                for j in 0..k {
                    m[(i, j)] += c * left[i] * right[j];
                }
            }
        }
        m
    }

    /// Orthonormal basis of the span of all `u_k, v_k` and the finite-rank
    /// part of the operator there (identity part excluded).
    pub fn support(&self) -> Result<(Vec<FieldState>, DMatrix<C64>)> {
        if self.terms.is_empty() {
            return Ok((Vec::new(), DMatrix::zeros(0, 0)));
        }
        let vecs: Vec<&FieldState> = self.terms.iter().flat_map(|(_, u, v)| [u, v]).collect();
        let (basis, _) = orthonormal_span(&vecs)?;
        let bare = Self { identity: 0.0, terms: self.terms.clone(), kind: ObservableKind::General };
        let m = bare.compress(&basis);
        Ok((basis, m))
    }

    fn on_support(&self) -> Result<DMatrix<C64>> {
        let (_, m) = self.support()?;
        let k = m.nrows();
        Ok(m + DMatrix::<C64>::identity(k, k) * C64::from(self.identity))
    }

    pub fn hermiticity_residual(&self) -> Result<f64> {
        let a = self.on_support()?;
        Ok(max_abs_diff(&a, &a.adjoint()))
    }

    /// Largest entry of `O^2 - O`, including the identity part on the complement.
    pub fn projector_residual(&self) -> Result<f64> {
        let a = self.on_support()?;
        let off = (self.identity * self.identity - self.identity).abs();
        Ok(max_abs_diff(&(&a * &a), &a).max(off).max(max_abs_diff(&a, &a.adjoint())))
    }

    /// Largest entry of `O^2 - 1` on the support. The complement must be
    /// annihilated or mapped to `±1`.
    pub fn dichotomous_residual(&self) -> Result<f64> {
        let a = self.on_support()?;
        let k = a.nrows();
        let id = DMatrix::<C64>::identity(k, k);
        let off = if self.identity == 0.0 { 0.0 } else { (self.identity.abs() - 1.0).abs() };
        Ok(max_abs_diff(&(&a * &a), &id).max(off).max(max_abs_diff(&a, &a.adjoint())))
    }

    pub fn check_projector(&self) -> Result<()> {
        let r = self.projector_residual()?;
        if r > 1e-9 {
            Err(Error::NotAProjector(r))
        } else {
            Ok(())
        }
    }

    pub fn check_dichotomous(&self) -> Result<()> {
        let r = self.dichotomous_residual()?;
        if r > 1e-9 {
            Err(Error::NotDichotomous(r))
        } else {
            Ok(())
        }
    }

    /// Projector onto the eigenvectors with positive eigenvalue.
    pub fn positive_projector(&self) -> Result<Self> {
        if self.identity != 0.0 {
            return Err(Error::Invalid("positive projector needs a finite-rank operator".into()));
        }
        let (basis, m) = self.support()?;
        let (vals, vecs) = hermitian_eigen(&m);
        let k = basis.len();
        let mut p = DMatrix::zeros(k, k);
        for (a, &lam) in vals.iter().enumerate() {
            if lam > 1e-12 {
                let col = vecs.column(a);
                p += col * col.adjoint();
            }
        }
        Ok(Self::from_span(&basis, &p, ObservableKind::Projector))
    }

    /// `<psi|O|psi>`.
    pub fn expectation(&self, psi: &FieldState) -> C64 {
        let mut acc = C64::from(self.identity * psi.norm_sqr());
        for (c, u, v) in &self.terms {
            acc += c * psi.inner(u) * v.inner(psi);
        }
        acc
    }

    /// Dense matrix on the truncated Fock space with the given cutoffs.
    pub fn to_dense(&self, cutoffs: &[usize]) -> DMatrix<C64> {
        let dim: usize = cutoffs.iter().map(|c| c + 1).product();
        let mut m = DMatrix::<C64>::identity(dim, dim) * C64::from(self.identity);
        for (c, u, v) in &self.terms {
            let du = u.to_dense(cutoffs);
            let dv = v.to_dense(cutoffs);
            m += (du * dv.adjoint()) * *c;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::EffectiveModeBasis;

    #[test]
    fn projector_checks() {
        let b = EffectiveModeBasis::orthonormal(&["f"]);
        let one = FieldState::fock(&b, &[1]).unwrap().scaled(C64::from(3.0));
        let p = FieldObservable::projector_onto(&one).unwrap();
        assert!(p.check_projector().is_ok());
        assert!(p.complement().check_projector().is_ok());
        let two = p.compress(&[FieldState::fock(&b, &[1]).unwrap()]);
        assert!((two[(0, 0)].re - 1.0).abs() < 1e-15);
        let bad = FieldObservable::new(0.0, vec![(C64::from(2.0), one.clone(), one)], ObservableKind::General);
        assert!(matches!(bad.check_projector(), Err(Error::NotAProjector(_))));
    }

    #[test]
    fn dichotomous_on_two_states() {
        let b = EffectiveModeBasis::orthonormal(&["f"]);
        let e0 = FieldState::fock(&b, &[0]).unwrap();
        let e1 = FieldState::fock(&b, &[1]).unwrap();
        let z = DMatrix::from_row_slice(2, 2, &[C64::from(1.0), C64::from(0.0), C64::from(0.0), C64::from(-1.0)]);
        let o = FieldObservable::from_span(&[e0.clone(), e1], &z, ObservableKind::Dichotomous);
        assert!(o.check_dichotomous().is_ok());
        let pos = o.positive_projector().unwrap();
        assert!((pos.expectation(&e0).re - 1.0).abs() < 1e-12);
    }
}
