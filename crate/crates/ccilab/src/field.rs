//! Effective modes, photon statistics and truncated multimode Fock states.
//!
//! A mode is an abstract label plus its declared overlaps with the other
//! modes; the continuous mode functions themselves never appear. Field
//! states are stored as short sums of product vectors over orthonormal
//! modes, so inner products are exact products of per-mode dot products and
//! a four-mode cat state with large amplitudes stays cheap.

use nalgebra::{DMatrix, DVector};

use crate::linalg::hermitian_eigen;
use crate::{Error, Result, C64};

/// Relative truncation residual accepted by every state builder.
pub const TRUNCATION_TOL: f64 = 1e-10;
/// Hard ceiling for automatic cutoff growth.
pub const MAX_CUTOFF: usize = 400;
/// Largest number of leading occupation patterns `compacted` will expand.
pub const COMPACT_LIMIT: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveModeBasis {
    labels: Vec<String>,
    gram: DMatrix<C64>,
    orthonormalized: bool,
}

impl EffectiveModeBasis {
    pub fn orthonormal<S: AsRef<str>>(labels: &[S]) -> Self {
        let n = labels.len();
        Self {
            labels: labels.iter().map(|s| s.as_ref().to_string()).collect(),
            gram: DMatrix::identity(n, n),
            orthonormalized: true,
        }
    }

    /// Modes with declared pairwise overlaps `gram[(i, j)] = <f_i|f_j>`.
    pub fn new(labels: Vec<String>, gram: DMatrix<C64>) -> Result<Self> {
        let n = labels.len();
        if gram.nrows() != n || gram.ncols() != n {
            return Err(Error::Invalid(format!("gram must be {n}x{n}")));
        }
        let scale = gram.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let herm = crate::linalg::hermiticity_residual(&gram);
        if herm > 1e-10 * scale {
            return Err(Error::Invalid(format!("gram not Hermitian ({herm:.2e})")));
        }
        if (0..n).any(|i| gram[(i, i)].re < 0.0 || gram[(i, i)].im.abs() > 1e-10 * scale) {
            return Err(Error::Invalid("gram diagonal must be real and non-negative".into()));
        }
        if n > 0 {
            let (vals, _) = hermitian_eigen(&gram);
            if vals[0] < -1e-10 * scale {
                return Err(Error::Invalid(format!("gram not positive semidefinite ({:.2e})", vals[0])));
            }
        }
        let id = DMatrix::<C64>::identity(n, n);
        let orthonormalized = crate::linalg::max_abs_diff(&gram, &id) < 1e-12;
        Ok(Self { labels, gram, orthonormalized })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn gram(&self) -> &DMatrix<C64> {
        &self.gram
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormalized
    }

    /// Gram–Schmidt in the metric given by the Gram matrix.
    ///
    /// Returns the orthonormal basis and the coefficient matrix `C` whose
    /// column k expresses new mode k in the old modes. Null directions are
    /// dropped. An already orthonormal basis is returned unchanged.
    pub fn orthonormalize(&self) -> (EffectiveModeBasis, DMatrix<C64>) {
        let n = self.len();
        if self.orthonormalized {
            return (self.clone(), DMatrix::identity(n, n));
        }
        let g = &self.gram;
        let scale = (0..n).map(|i| g[(i, i)].re).fold(0.0, f64::max);
        let ip = |a: &DVector<C64>, b: &DVector<C64>| (a.adjoint() * g * b)[(0, 0)];
        let mut cols: Vec<DVector<C64>> = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let mut v = DVector::<C64>::zeros(n);
            v[i] = C64::from(1.0);
            // two passes keep the result orthogonal to roundoff
            for _ in 0..2 {
                for u in &cols {
                    let proj = ip(u, &v);
                    v -= u * proj;
                }
            }
            let nrm = ip(&v, &v).re;
            if nrm > 1e-12 * scale.max(1e-300) {
                cols.push(v / C64::from(nrm.sqrt()));
                labels.push(format!("{}#", self.labels[i]));
            }
        }
        let k = cols.len();
        let c = DMatrix::from_fn(n, k, |r, col| cols[col][r]);
        (
            EffectiveModeBasis { labels, gram: DMatrix::identity(k, k), orthonormalized: true },
            c,
        )
    }

    /// Adds a unit mode with overlaps `<f_i|f>` against this orthonormal set.
    ///
    /// Returns the extended orthonormal basis and the coordinates of the new
    /// mode in it. An extra label `"{aux}_perp"` is appended only when the
    /// mode leaves the existing span.
    pub fn extend(&self, aux: &str, overlaps: &[C64]) -> Result<(EffectiveModeBasis, DVector<C64>)> {
        if !self.orthonormalized {
            return Err(Error::Invalid("extend needs an orthonormal basis".into()));
        }
        if overlaps.len() != self.len() {
            return Err(Error::Invalid("one overlap per existing mode".into()));
        }
        let inside: f64 = overlaps.iter().map(|z| z.norm_sqr()).sum();
        if inside > 1.0 + 1e-12 {
            return Err(Error::DirectionUnreachable);
        }
        let rest = (1.0 - inside).max(0.0).sqrt();
        let mut labels = self.labels.clone();
        let mut coords: Vec<C64> = overlaps.to_vec();
        if rest > 1e-12 {
            labels.push(format!("{aux}_perp"));
            coords.push(C64::from(rest));
        }
        let basis = EffectiveModeBasis::orthonormal(&labels);
        Ok((basis, DVector::from_vec(coords)))
    }
}

/// Generating function of a single-mode pure state, `|chi> = g(a^dagger)|vac>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhotonStatistics {
    Fock { n: usize },
    Coherent { amplitude: f64, phase: f64 },
    SqueezedVacuum { rho: f64 },
}

impl PhotonStatistics {
    /// `g^{(n)}(0)` from the closed forms.
    pub fn derivative_at_zero(&self, n: usize) -> C64 {
        match *self {
            PhotonStatistics::Fock { n: n0 } => {
                if n == n0 {
                    C64::from(sqrt_factorial(n))
                } else {
                    C64::from(0.0)
                }
            }
            PhotonStatistics::Coherent { amplitude, phase } => {
                C64::from_polar(amplitude, phase).powu(n as u32) * (-0.5 * amplitude * amplitude).exp()
            }
            PhotonStatistics::SqueezedVacuum { rho } => {
                if n % 2 == 1 {
                    return C64::from(0.0);
                }
                let m = n / 2;
                let dfact: f64 = (1..=m).map(|k| (2 * k - 1) as f64).product();
                C64::from(dfact * (-rho.tanh()).powi(m as i32) / rho.cosh().sqrt())
            }
        }
    }

    /// Fock amplitudes `b_k = g^{(k)}(0)/sqrt(k!)` for `k < len`, by stable recurrences.
    pub fn fock_amplitudes(&self, len: usize) -> Vec<C64> {
        let mut out = vec![C64::from(0.0); len];
        match *self {
            PhotonStatistics::Fock { n } => {
                if n < len {
                    out[n] = C64::from(1.0);
                }
            }
            PhotonStatistics::Coherent { amplitude, phase } => {
                let z = C64::from_polar(amplitude, phase);
                let mut b = C64::from((-0.5 * amplitude * amplitude).exp());
                for (k, slot) in out.iter_mut().enumerate() {
                    if k > 0 {
                        b = b * z / (k as f64).sqrt();
                    }
                    *slot = b;
                }
            }
            PhotonStatistics::SqueezedVacuum { rho } => {
                let t = rho.tanh();
                let mut b = 1.0 / rho.cosh().sqrt();
                for k in (0..len).step_by(2) {
                    if k > 0 {
                        b *= -t * (((k - 1) as f64) / (k as f64)).sqrt();
                    }
                    out[k] = C64::from(b);
                }
            }
        }
        out
    }

    /// Shifted family `g^{(n+shift)}(0)/sqrt(n!)` for `n < len`.
    pub fn shifted_coefficients(&self, shift: usize, len: usize) -> Vec<C64> {
        let b = self.fock_amplitudes(len + shift);
        (0..len)
            .map(|n| {
                let ratio: f64 = (1..=shift).map(|j| ((n + j) as f64).sqrt()).product();
                b[n + shift] * ratio
            })
            .collect()
    }

    /// Mean photon number, used to size cutoffs.
    pub fn mean_photons(&self) -> f64 {
        match *self {
            PhotonStatistics::Fock { n } => n as f64,
            PhotonStatistics::Coherent { amplitude, .. } => amplitude * amplitude,
            PhotonStatistics::SqueezedVacuum { rho } => rho.sinh().powi(2),
        }
    }

    fn default_cutoff(&self, shift: usize) -> usize {
        let n_max = match *self {
            PhotonStatistics::Fock { n } => n,
            _ => shift,
        };
        let extra = match *self {
            PhotonStatistics::Fock { .. } => 0.0,
            _ => self.mean_photons(),
        };
        16usize.max(n_max + 4 * extra.ceil() as usize + 8)
    }

    /// Relative weight of the shifted family beyond `cutoff`.
    ///
    /// The tail is summed explicitly until the terms are negligible, so the
    /// estimate does not suffer from cancellation against the head.
    pub fn truncation_residual(&self, shift: usize, cutoff: usize) -> f64 {
        if let PhotonStatistics::Fock { n } = *self {
            return if n >= shift && n - shift > cutoff { 1.0 } else { 0.0 };
        }
        let mean = self.mean_photons() + shift as f64;
        let mut horizon = cutoff + 64;
        loop {
            let coeffs = self.shifted_coefficients(shift, horizon + 1);
            let head: f64 = coeffs[..=cutoff].iter().map(|z| z.norm_sqr()).sum();
            let tail: f64 = coeffs[cutoff + 1..].iter().map(|z| z.norm_sqr()).sum();
            let last = coeffs[horizon].norm_sqr();
            let total = head + tail;
            let settled = (horizon as f64) > 2.0 * mean + 20.0 && last <= 1e-30 * total.max(1e-300);
            if settled || horizon > cutoff + 4000 {
                return if total > 0.0 { tail / total } else { 0.0 };
            }
            horizon *= 2;
        }
    }

    /// Cutoff for the shifted family: either checked against the tolerance,
    /// or grown from the default until the tolerance is met.
    pub fn resolve_cutoff(&self, shift: usize, requested: Option<usize>) -> Result<(usize, f64)> {
        match requested {
            Some(c) => {
                let r = self.truncation_residual(shift, c);
                if r > TRUNCATION_TOL {
                    Err(Error::CutoffTooSmall { residual: r, bound: TRUNCATION_TOL })
                } else {
                    Ok((c, r))
                }
            }
            None => {
                let mut c = self.default_cutoff(shift);
                loop {
                    let r = self.truncation_residual(shift, c);
                    if r <= TRUNCATION_TOL {
                        return Ok((c, r));
                    }
                    if c >= MAX_CUTOFF {
                        return Err(Error::CutoffTooSmall { residual: r, bound: TRUNCATION_TOL });
                    }
                    c = (c * 3 / 2 + 1).min(MAX_CUTOFF);
                }
            }
        }
    }
}

pub fn sqrt_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).sqrt()).product()
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[derive(Clone, Debug)]
struct Term {
    coeff: C64,
    factors: Vec<DVector<C64>>,
}

/// Pure field state as a finite sum of product vectors.
///
/// The stored norm is the true norm of the truncated vector; states such as
/// the outgoing pair are deliberately left unnormalized.
#[derive(Clone, Debug)]
pub struct FieldState {
    basis: EffectiveModeBasis,
    terms: Vec<Term>,
    norm_sqr: f64,
    residual: f64,
}

fn dot(a: &DVector<C64>, b: &DVector<C64>) -> C64 {
    let n = a.len().min(b.len());
    (0..n).map(|i| a[i].conj() * b[i]).sum()
}

impl FieldState {
    /// Single product vector; factor i holds the Fock amplitudes of mode i.
    pub fn product(basis: &EffectiveModeBasis, factors: Vec<DVector<C64>>, residual: f64) -> Result<Self> {
        if !basis.is_orthonormal() {
            return Err(Error::Invalid("field states need an orthonormal mode basis".into()));
        }
        if factors.len() != basis.len() {
            return Err(Error::Invalid("one factor per mode".into()));
        }
        let mut s = Self {
            basis: basis.clone(),
            terms: vec![Term { coeff: C64::from(1.0), factors }],
            norm_sqr: 0.0,
            residual,
        };
        s.norm_sqr = s.inner(&s).re;
        Ok(s)
    }

    pub fn fock(basis: &EffectiveModeBasis, occupation: &[usize]) -> Result<Self> {
        let factors = occupation
            .iter()
            .map(|&n| {
                let mut v = DVector::zeros(n + 1);
                v[n] = C64::from(1.0);
                v
            })
            .collect();
        Self::product(basis, factors, 0.0)
    }

    pub fn vacuum(basis: &EffectiveModeBasis) -> Self {
        Self::fock(basis, &vec![0; basis.len()]).expect("orthonormal basis")
    }

    pub fn zero(basis: &EffectiveModeBasis) -> Self {
        Self { basis: basis.clone(), terms: Vec::new(), norm_sqr: 0.0, residual: 0.0 }
    }

    pub fn basis(&self) -> &EffectiveModeBasis {
        &self.basis
    }

    pub fn norm_sqr(&self) -> f64 {
        self.norm_sqr
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr.sqrt()
    }

    /// Relative truncation residual carried from the builders.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn is_zero(&self) -> bool {
        self.norm_sqr == 0.0
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Largest photon number stored per mode.
    pub fn cutoffs(&self) -> Vec<usize> {
        let mut out = vec![0; self.basis.len()];
        for t in &self.terms {
            for (i, f) in t.factors.iter().enumerate() {
                out[i] = out[i].max(f.len().saturating_sub(1));
            }
        }
        out
    }

    /// `<self|other>`, exact over the stored terms.
    pub fn inner(&self, other: &FieldState) -> C64 {
        assert_eq!(self.basis.labels(), other.basis.labels(), "field states on different mode sets");
        let mut acc = C64::from(0.0);
        for a in &self.terms {
            for b in &other.terms {
                let mut p = a.coeff.conj() * b.coeff;
                for (fa, fb) in a.factors.iter().zip(&b.factors) {
                    if p == C64::from(0.0) {
                        break;
                    }
                    p *= dot(fa, fb);
                }
                acc += p;
            }
        }
        acc
    }

    pub fn scaled(&self, c: C64) -> FieldState {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= c;
        }
        out.norm_sqr = self.norm_sqr * c.norm_sqr();
        out
    }

    pub fn normalized(&self) -> Result<FieldState> {
        if self.norm_sqr <= 0.0 {
            return Err(Error::ZeroTarget);
        }
        Ok(self.scaled(C64::from(1.0 / self.norm())))
    }

    /// `sum_k c_k |psi_k>`.
    pub fn combination(parts: &[(C64, &FieldState)]) -> Result<FieldState> {
        let first = parts.first().ok_or_else(|| Error::Invalid("empty combination".into()))?;
        let basis = first.1.basis.clone();
        let mut terms = Vec::new();
        let mut residual: f64 = 0.0;
        for (c, s) in parts {
            if s.basis.labels() != basis.labels() {
                return Err(Error::Invalid("combination over different mode sets".into()));
            }
            residual = residual.max(s.residual);
            for t in &s.terms {
                terms.push(Term { coeff: t.coeff * c, factors: t.factors.clone() });
            }
        }
        let mut out = FieldState { basis, terms, norm_sqr: 0.0, residual };
        out.norm_sqr = out.inner(&out).re.max(0.0);
        Ok(out)
    }

    /// Amplitude of one occupation pattern.
    pub fn amplitude(&self, occupation: &[usize]) -> C64 {
        self.terms
            .iter()
            .map(|t| {
                t.factors
                    .iter()
                    .zip(occupation)
                    .fold(t.coeff, |acc, (f, &n)| if n < f.len() { acc * f[n] } else { C64::from(0.0) })
            })
            .sum()
    }

    /// Dense vector over all occupations up to `cutoffs`, first mode most significant.
    pub fn to_dense(&self, cutoffs: &[usize]) -> DVector<C64> {
        let dims: Vec<usize> = cutoffs.iter().map(|c| c + 1).collect();
        let total: usize = dims.iter().product();
        let mut out = DVector::zeros(total);
        let mut occ = vec![0usize; dims.len()];
        for slot in out.iter_mut() {
            *slot = self.amplitude(&occ);
            for m in (0..dims.len()).rev() {
                occ[m] += 1;
                if occ[m] < dims[m] {
                    break;
                }
                occ[m] = 0;
            }
        }
        out
    }

    /// Terms merged into dense slices of the last mode, one per leading
    /// occupation pattern. Cancellations then happen once, amplitude by
    /// amplitude, instead of inside every later inner product. States whose
    /// leading modes span more than `COMPACT_LIMIT` patterns are returned as is.
    pub fn compacted(&self) -> FieldState {
        let m = self.basis.len();
        if m == 0 || self.terms.len() <= 1 {
            return self.clone();
        }
        let cut = self.cutoffs();
        let lead: usize = cut[..m - 1].iter().map(|c| c + 1).product();
        if lead > COMPACT_LIMIT {
            return self.clone();
        }
        let last_len = cut[m - 1] + 1;
        let mut slices: std::collections::BTreeMap<Vec<usize>, DVector<C64>> = std::collections::BTreeMap::new();
        for t in &self.terms {
            let mut occ = vec![0usize; m - 1];
            'patterns: loop {
                let mut w = t.coeff;
                for (f, &n) in t.factors.iter().zip(&occ) {
                    w *= if n < f.len() { f[n] } else { C64::from(0.0) };
                }
                if w != C64::from(0.0) {
                    let slot = slices.entry(occ.clone()).or_insert_with(|| DVector::zeros(last_len));
                    for (k, a) in t.factors[m - 1].iter().enumerate() {
                        slot[k] += w * a;
                    }
                }
                for i in (0..m - 1).rev() {
                    occ[i] += 1;
                    if occ[i] < t.factors[i].len() {
                        continue 'patterns;
                    }
                    occ[i] = 0;
                }
                break;
            }
        }
        let terms = slices
            .into_iter()
            .filter(|(_, v)| v.iter().any(|z| *z != C64::from(0.0)))
            .map(|(occ, v)| {
                let mut factors: Vec<DVector<C64>> = occ
                    .iter()
                    .map(|&n| {
                        let mut u = DVector::zeros(n + 1);
                        u[n] = C64::from(1.0);
                        u
                    })
                    .collect();
                factors.push(v);
                Term { coeff: C64::from(1.0), factors }
            })
            .collect();
        let mut out = FieldState { basis: self.basis.clone(), terms, norm_sqr: 0.0, residual: self.residual };
        out.norm_sqr = out.inner(&out).re.max(0.0);
        out
    }

    /// The same state with extra modes in the vacuum, appended after the existing ones.
    pub fn with_vacuum_modes<S: AsRef<str>>(&self, extra: &[S]) -> FieldState {
        let mut labels: Vec<String> = self.basis.labels().to_vec();
        labels.extend(extra.iter().map(|s| s.as_ref().to_string()));
        let basis = EffectiveModeBasis::orthonormal(&labels);
        let vac = DVector::from_vec(vec![C64::from(1.0)]);
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut f = t.factors.clone();
                f.extend(extra.iter().map(|_| vac.clone()));
                Term { coeff: t.coeff, factors: f }
            })
            .collect();
        FieldState { basis, terms, norm_sqr: self.norm_sqr, residual: self.residual }
    }

    /// Product state `self ⊗ other` on the concatenated mode list.
    pub fn tensor(&self, other: &FieldState) -> FieldState {
        let mut labels: Vec<String> = self.basis.labels().to_vec();
        labels.extend(other.basis.labels().iter().cloned());
        let basis = EffectiveModeBasis::orthonormal(&labels);
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                let mut f = a.factors.clone();
                f.extend(b.factors.iter().cloned());
                terms.push(Term { coeff: a.coeff * b.coeff, factors: f });
            }
        }
        FieldState {
            basis,
            terms,
            norm_sqr: self.norm_sqr * other.norm_sqr,
            residual: self.residual + other.residual,
        }
    }
}

/// Orthonormal basis of the span of `vectors` by canonical orthogonalization.
///
/// Returns the basis and the coordinate matrix whose column j holds the
/// components of `vectors[j]`. Directions with Gram eigenvalue below
/// `1e-13` of the largest are dropped, which also removes zero vectors.
pub fn orthonormal_span(vectors: &[&FieldState]) -> Result<(Vec<FieldState>, DMatrix<C64>)> {
    let m = vectors.len();
    let g = DMatrix::from_fn(m, m, |i, j| vectors[i].inner(vectors[j]));
    let (vals, u) = hermitian_eigen(&g);
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..m).rev().filter(|&a| vals[a] > 1e-13 * top && vals[a] > 1e-300).collect();
    let mut basis = Vec::with_capacity(keep.len());
    let mut coords = DMatrix::zeros(keep.len(), m);
    for (row, &a) in keep.iter().enumerate() {
        let s = vals[a].sqrt();
        let parts: Vec<(C64, &FieldState)> = (0..m).map(|i| (u[(i, a)] / s, vectors[i])).collect();
        basis.push(FieldState::combination(&parts)?);
        for j in 0..m {
            coords[(row, j)] = u[(j, a)].conj() * s;
        }
    }
    // Directions with small Gram eigenvalues come out of heavy cancellation;
    // merge their terms and restore orthonormality with one symmetric pass.
    let basis: Vec<FieldState> = basis.iter().map(FieldState::compacted).collect();
    let k = basis.len();
    let g2 = DMatrix::from_fn(k, k, |i, j| basis[i].inner(&basis[j]));
    if crate::linalg::max_abs_diff(&g2, &DMatrix::identity(k, k)) <= 1e-14 {
        return Ok((basis, coords));
    }
    let half = crate::linalg::psd_sqrt(&g2);
    let inv_half = half.clone().try_inverse().ok_or(Error::DegenerateState)?;
    let refined = (0..k)
        .map(|i| {
            let parts: Vec<(C64, &FieldState)> = (0..k).map(|j| (inv_half[(j, i)], &basis[j])).collect();
            FieldState::combination(&parts).map(|f| f.compacted())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((refined, half * coords))
}

/// `prod_i g_i(a_i^dagger)|vac>` on an orthonormal basis, one `g` per mode.
pub fn build_state(g_list: &[PhotonStatistics], basis: &EffectiveModeBasis, cutoff: Option<usize>) -> Result<FieldState> {
    build_shifted(g_list, &vec![0; g_list.len()], basis, cutoff)
}

/// Product state whose mode-i factor is the shifted family `g_i^{(n + shift_i)}(0)/sqrt(n!)`.
pub fn build_shifted(
    g_list: &[PhotonStatistics],
    shifts: &[usize],
    basis: &EffectiveModeBasis,
    cutoff: Option<usize>,
) -> Result<FieldState> {
    if g_list.len() != basis.len() || shifts.len() != basis.len() {
        return Err(Error::Invalid("one generating function and shift per mode".into()));
    }
    let mut factors = Vec::with_capacity(g_list.len());
    let mut residual = 0.0;
    for (g, &s) in g_list.iter().zip(shifts) {
        let (c, r) = g.resolve_cutoff(s, cutoff)?;
        residual += r;
        factors.push(DVector::from_vec(g.shifted_coefficients(s, c + 1)));
    }
    let mut st = FieldState::product(basis, factors, residual)?;
    if st.norm_sqr == 0.0 {
        st.residual = 0.0;
    }
    Ok(st)
}

/// The unnormalized outgoing pair after absorbing one photon from mode 2
/// or N photons from mode 1.
pub fn outgoing_pair(
    g1: PhotonStatistics,
    g2: PhotonStatistics,
    n: usize,
    basis: &EffectiveModeBasis,
    cutoff: Option<usize>,
) -> Result<(FieldState, FieldState)> {
    if basis.len() != 2 {
        return Err(Error::Invalid("outgoing pair needs exactly two modes".into()));
    }
    if n < 2 {
        return Err(Error::InvalidPhotonNumbers(format!("N = {n} must be at least 2")));
    }
    let chi1 = build_shifted(&[g1, g2], &[0, 1], basis, cutoff)?;
    let chin = build_shifted(&[g1, g2], &[n, 0], basis, cutoff)?;
    Ok((chi1, chin))
}

/// Overlap of the outgoing pair from its generating-function series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapSeries {
    /// The series as written, on the unnormalized pair.
    pub raw: C64,
    /// Divided by both norms; `None` if either state vanishes.
    pub normalized: Option<C64>,
    pub norm1_sqr: f64,
    pub norm_n_sqr: f64,
}

/// `sum_n [g1^{(n)}]^* g1^{(N+n)} / n!  *  sum_m [g2^{(1+m)}]^* g2^{(m)} / m!`.
pub fn chi_overlap_series(
    g1: PhotonStatistics,
    g2: PhotonStatistics,
    n: usize,
    cutoff: Option<usize>,
) -> Result<OverlapSeries> {
    let (c1, _) = g1.resolve_cutoff(n, cutoff)?;
    let (c1b, _) = g1.resolve_cutoff(0, cutoff)?;
    let (c2, _) = g2.resolve_cutoff(1, cutoff)?;
    let (c2b, _) = g2.resolve_cutoff(0, cutoff)?;
    let k1 = c1.max(c1b);
    let k2 = c2.max(c2b);
    if k1 + n > 160 || k2 + 1 > 160 {
        return Err(Error::CutoffTooSmall { residual: f64::NAN, bound: TRUNCATION_TOL });
    }
    let d = |g: &PhotonStatistics, k: usize| g.derivative_at_zero(k);
    let mut s1 = C64::from(0.0);
    let mut a1 = 0.0;
    let mut an = 0.0;
    for j in 0..=k1 {
        let f = factorial(j);
        s1 += d(&g1, j).conj() * d(&g1, n + j) / f;
        a1 += d(&g1, j).norm_sqr() / f;
        an += d(&g1, n + j).norm_sqr() / f;
    }
    let mut s2 = C64::from(0.0);
    let mut b1 = 0.0;
    let mut bn = 0.0;
    for m in 0..=k2 {
        let f = factorial(m);
        s2 += d(&g2, 1 + m).conj() * d(&g2, m) / f;
        b1 += d(&g2, 1 + m).norm_sqr() / f;
        bn += d(&g2, m).norm_sqr() / f;
    }
    let raw = s1 * s2;
    let norm1_sqr = a1 * b1;
    let norm_n_sqr = an * bn;
    let normalized = if norm1_sqr > 0.0 && norm_n_sqr > 0.0 {
        Some(raw / (norm1_sqr * norm_n_sqr).sqrt())
    } else {
        None
    };
    Ok(OverlapSeries { raw, normalized, norm1_sqr, norm_n_sqr })
}

/// Coherent state with mode amplitudes `norm * direction_i`; `direction` must be a unit vector.
pub fn coherent_state(
    direction: &[C64],
    norm: f64,
    basis: &EffectiveModeBasis,
    cutoff: Option<usize>,
) -> Result<FieldState> {
    let len: f64 = direction.iter().map(|z| z.norm_sqr()).sum();
    if (len - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!("direction has squared length {len}")));
    }
    let g: Vec<PhotonStatistics> = direction
        .iter()
        .map(|z| PhotonStatistics::Coherent { amplitude: norm * z.norm(), phase: z.arg() })
        .collect();
    build_state(&g, basis, cutoff)
}

/// Born weight of `target` in `state` and the normalized target.
pub fn project_onto(state: &FieldState, target: &FieldState) -> Result<(f64, FieldState)> {
    if target.norm_sqr() <= 0.0 {
        return Err(Error::ZeroTarget);
    }
    let amp = target.inner(state);
    Ok((amp.norm_sqr() / target.norm_sqr(), target.normalized()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> EffectiveModeBasis {
        EffectiveModeBasis::orthonormal(&["f1", "f2"])
    }

    #[test]
    fn derivative_examples() {
        let f = PhotonStatistics::Fock { n: 2 }.derivative_at_zero(2);
        assert!((f.re - 2f64.sqrt()).abs() < 1e-15);
        let c = PhotonStatistics::Coherent { amplitude: 1.0, phase: 0.0 }.derivative_at_zero(2);
        assert!((c.re - (-0.5f64).exp()).abs() < 1e-15);
        let s = PhotonStatistics::SqueezedVacuum { rho: 0.7 }.derivative_at_zero(1);
        assert_eq!(s, C64::from(0.0));
    }

    #[test]
    fn recurrences_match_closed_forms() {
        for g in [
            PhotonStatistics::Coherent { amplitude: 1.3, phase: 0.4 },
            PhotonStatistics::SqueezedVacuum { rho: 0.8 },
            PhotonStatistics::Fock { n: 3 },
        ] {
            let b = g.fock_amplitudes(30);
            for (k, bk) in b.iter().enumerate() {
                let direct = g.derivative_at_zero(k) / sqrt_factorial(k);
                assert!((bk - direct).norm() < 1e-13, "{g:?} k={k}");
            }
        }
    }

    #[test]
    fn single_fock_mode() {
        let b = EffectiveModeBasis::orthonormal(&["f"]);
        let s = build_state(&[PhotonStatistics::Fock { n: 1 }], &b, None).unwrap();
        assert_eq!(s.amplitude(&[1]), C64::from(1.0));
        assert_eq!(s.amplitude(&[0]), C64::from(0.0));
    }

    #[test]
    fn coherent_poisson_coefficients() {
        let b = EffectiveModeBasis::orthonormal(&["f"]);
        let s = build_state(&[PhotonStatistics::Coherent { amplitude: 1.0, phase: 0.0 }], &b, Some(20)).unwrap();
        for n in 0..=20 {
            let want = (-0.5f64).exp() / sqrt_factorial(n);
            assert!((s.amplitude(&[n]).re - want).abs() < 1e-15);
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_mode_fock() {
        let s = build_state(&[PhotonStatistics::Fock { n: 2 }, PhotonStatistics::Fock { n: 1 }], &two(), None).unwrap();
        assert_eq!(s.amplitude(&[2, 1]), C64::from(1.0));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tight_cutoff_is_rejected() {
        let b = EffectiveModeBasis::orthonormal(&["f"]);
        let r = build_state(&[PhotonStatistics::Coherent { amplitude: 3.0, phase: 0.0 }], &b, Some(5));
        assert!(matches!(r, Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn fock_pair_is_orthogonal() {
        let (a, b) = outgoing_pair(PhotonStatistics::Fock { n: 2 }, PhotonStatistics::Fock { n: 1 }, 2, &two(), None).unwrap();
        assert!((a.norm_sqr() - 1.0).abs() < 1e-15);
        assert!((b.norm_sqr() - 2.0).abs() < 1e-15);
        assert_eq!(a.inner(&b), C64::from(0.0));
    }

    #[test]
    fn coherent_pair_is_proportional() {
        let (f1, f2, n) = (0.9, 1.4, 3);
        let g1 = PhotonStatistics::Coherent { amplitude: f1, phase: 0.0 };
        let g2 = PhotonStatistics::Coherent { amplitude: f2, phase: 0.0 };
        let (a, b) = outgoing_pair(g1, g2, n, &two(), None).unwrap();
        let ov = a.inner(&b);
        assert!((ov.re - f1.powi(n as i32) * f2).abs() < 1e-10);
        assert!((ov.norm_sqr() - a.norm_sqr() * b.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn empty_second_mode_gives_zero_state() {
        let (a, _) = outgoing_pair(PhotonStatistics::Fock { n: 2 }, PhotonStatistics::Fock { n: 0 }, 2, &two(), None).unwrap();
        assert!(a.is_zero());
    }

    #[test]
    fn series_examples() {
        let s = chi_overlap_series(PhotonStatistics::Fock { n: 3 }, PhotonStatistics::Fock { n: 2 }, 2, None).unwrap();
        assert_eq!(s.raw, C64::from(0.0));
        let unit = PhotonStatistics::Coherent { amplitude: 1.0, phase: 0.0 };
        let s = chi_overlap_series(unit, unit, 2, None).unwrap();
        assert!((s.raw - C64::from(1.0)).norm() < 1e-10);
        let (t1, t2) = (0.3, -0.5);
        let s = chi_overlap_series(
            PhotonStatistics::Coherent { amplitude: 0.8, phase: t1 },
            PhotonStatistics::Coherent { amplitude: 1.1, phase: t2 },
            2,
            None,
        )
        .unwrap();
        assert!((s.raw.arg() - (2.0 * t1 - t2)).abs() < 1e-12);
    }

    #[test]
    fn projections() {
        let b = EffectiveModeBasis::orthonormal(&["f"]);
        let vac = FieldState::vacuum(&b);
        assert!((project_onto(&vac, &vac).unwrap().0 - 1.0).abs() < 1e-15);
        let one = FieldState::fock(&b, &[1]).unwrap();
        let f = coherent_state(&[C64::from(1.0)], 1.0, &b, None).unwrap();
        let (w, _) = project_onto(&one, &f).unwrap();
        assert!((w - (-1f64).exp()).abs() < 1e-12);
        assert!(matches!(project_onto(&one, &FieldState::zero(&b)), Err(Error::ZeroTarget)));
    }

    #[test]
    fn extension_adds_perpendicular_mode() {
        let (ext, coords) = two().extend("aux", &[C64::from(0.6), C64::from(0.0)]).unwrap();
        assert_eq!(ext.len(), 3);
        assert!((coords[2].re - 0.8).abs() < 1e-15);
        let (same, _) = two().extend("aux", &[C64::from(0.6), C64::from(0.8)]).unwrap();
        assert_eq!(same.len(), 2);
    }

    #[test]
    fn nonorthogonal_basis_orthonormalizes() {
        let g = DMatrix::from_row_slice(2, 2, &[C64::from(1.0), C64::new(0.3, 0.2), C64::new(0.3, -0.2), C64::from(2.0)]);
        let b = EffectiveModeBasis::new(vec!["a".into(), "b".into()], g.clone()).unwrap();
        let (o, c) = b.orthonormalize();
        assert!(o.is_orthonormal());
        let id = c.adjoint() * &g * &c;
        assert!(crate::linalg::max_abs_diff(&id, &DMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn squeezed_needs_growth() {
        let b = EffectiveModeBasis::orthonormal(&["f"]);
        let s = build_state(&[PhotonStatistics::SqueezedVacuum { rho: 1.0 }], &b, None).unwrap();
        assert!(s.residual() <= TRUNCATION_TOL);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
        assert!(s.cutoffs()[0] > 16);
    }
}
