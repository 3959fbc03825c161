//! Slow, independent cross-checks.
//!
//! Nothing here calls the routines it is meant to check: metrics are taken
//! from full dense Fock matrices, Clebsch-Gordan values come from explicit
//! lowering-operator constructions, and the toy integrator solves the
//! Schrodinger equation directly.

use nalgebra::{DMatrix, DVector};

use crate::cci::{CciState, Metrics};
use crate::field::FieldState;
use crate::{Error, Result, C64};

fn cz() -> C64 {
    C64::new(0.0, 0.0)
}

// ---------------------------------------------------------------- dense metrics

fn dense_kron_label(k: &[[C64; 2]; 2], m: &DMatrix<C64>) -> DMatrix<C64> {
    let d = m.nrows();
    let mut out = DMatrix::zeros(2 * d, 2 * d);
    for a in 0..2 {
        for b in 0..2 {
            for i in 0..d {
                for j in 0..d {
                    out[(a * d + i, b * d + j)] = k[a][b] * m[(i, j)];
                }
            }
        }
    }
    out
}

fn abs_eigen_sum(h: &DMatrix<C64>) -> f64 {
    crate::linalg::hermitian_eigen(h).0.iter().map(|x| x.abs()).sum()
}

/// Label-field density matrix expanded on the full truncated Fock space.
pub fn dense_rho(state: &CciState) -> (DMatrix<C64>, usize) {
    let basis = state.field_basis();
    let mut cut = vec![0usize; basis.first().map(|b| b.basis().len()).unwrap_or(0)];
    for b in basis {
        for (c, x) in cut.iter_mut().zip(b.cutoffs()) {
            *c = (*c).max(x);
        }
    }
    let cols: Vec<DVector<C64>> = basis.iter().map(|b| b.to_dense(&cut)).collect();
    let d = cols.first().map(|c| c.len()).unwrap_or(0);
    let k = cols.len();
    let mut v = DMatrix::<C64>::zeros(2 * d, 2 * k);
    for l in 0..2 {
        for (j, col) in cols.iter().enumerate() {
            for i in 0..d {
                v[(l * d + i, l * k + j)] = col[i];
            }
        }
    }
    (&v * state.rho() * v.adjoint(), d)
}

/// Complementarity metrics from dense blocks.
pub fn dense_metrics(state: &CciState) -> Metrics {
    let (rho, d) = dense_rho(state);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let r = [[C64::new(s, 0.0), C64::new(s, 0.0)], [C64::new(-s, 0.0), C64::new(s, 0.0)]];
    let big = dense_kron_label(&r, &DMatrix::identity(d, d));
    let path = &big * &rho * big.adjoint();
    let aa = path.view((0, 0), (d, d)).into_owned();
    let bb = path.view((d, d), (d, d)).into_owned();
    let ab = path.view((0, d), (d, d)).into_owned();
    let w_plus = aa.trace().re;
    let w_minus = bb.trace().re;
    let visibility = 2.0 * ab.trace().norm();
    // twice the trace norm of ab, straight from its singular values
    let coherence = 2.0 * ab.singular_values().sum();
    // Tr rho^2 = 1 exactly for pure states
    let pure = rho.iter().map(|z| z.norm_sqr()).sum::<f64>() >= 1.0 - 1e-9;
    let concurrence = pure.then(|| {
        let m00 = rho.view((0, 0), (d, d)).trace();
        let m11 = rho.view((d, d), (d, d)).trace();
        let m01 = rho.view((0, d), (d, d)).trace();
        let purity = (m00 * m00 + m11 * m11).re + 2.0 * m01.norm_sqr();
        (2.0 * (1.0 - purity)).max(0.0).sqrt()
    });
    Metrics {
        visibility,
        predictability: (w_plus - w_minus).abs(),
        distinguishability: abs_eigen_sum(&(&aa - &bb)),
        coherence,
        concurrence,
        lambda_plus: 0.5 * (1.0 + visibility),
        lambda_minus: 0.5 * (1.0 - visibility),
        w_plus,
        w_minus,
        phi: state.phi(),
        gamma: state.gamma(),
    }
}

/// `<a|b>` by explicit contraction of dense Fock vectors.
pub fn dense_overlap(a: &FieldState, b: &FieldState) -> C64 {
    let cut: Vec<usize> = a.cutoffs().iter().zip(b.cutoffs()).map(|(x, y)| (*x).max(y)).collect();
    let (u, v) = (a.to_dense(&cut), b.to_dense(&cut));
    u.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum()
}

// ---------------------------------------------------------------- LHV

/// Largest `s0 M R + s1 M' R + s2 M R' + s3 M' R'` over local ±1 values.
pub fn lhv_enumerate(signs: [i8; 4]) -> f64 {
    let pm = [-1.0, 1.0];
    let s: Vec<f64> = signs.iter().map(|&x| x as f64).collect();
    let mut best = f64::NEG_INFINITY;
    for m in pm {
        for mp in pm {
            for r in pm {
                for rp in pm {
                    best = best.max(s[0] * m * r + s[1] * mp * r + s[2] * m * rp + s[3] * mp * rp);
                }
            }
        }
    }
    best
}

// ---------------------------------------------------------------- grid search

/// Grid search for the maximum on `[lo, hi]`, refined by golden section to 1e-8.
pub fn grid_optimize<F: Fn(f64) -> f64>(f: F, bounds: (f64, f64), resolution: usize) -> (f64, f64) {
    let (lo, hi) = bounds;
    let n = resolution.max(2);
    let h = (hi - lo) / n as f64;
    let mut best = (lo, f(lo));
    for i in 1..=n {
        let x = lo + i as f64 * h;
        let y = f(x);
        if y > best.1 {
            best = (x, y);
        }
    }
    let (mut a, mut b) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-8 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    let y = f(x);
    if y >= best.1 {
        (x, y)
    } else {
        best
    }
}

/// Squared overlaps of a coherent probe with the two normalized Fock
/// outgoing states `|n1, n2-1>` and `|n1-N, n2>`.
fn probe_overlaps(n1: usize, n2: usize, n: usize, alpha_abs: f64, norm: f64) -> (f64, f64) {
    let beta_abs = (1.0 - alpha_abs * alpha_abs).max(0.0).sqrt();
    let a2 = (norm * alpha_abs).powi(2);
    let b2 = (norm * beta_abs).powi(2);
    let fac = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
    let poisson = |m2: f64, k: usize| (-m2).exp() * m2.powi(k as i32) / fac(k);
    // product of single-mode Poisson weights
    let x = poisson(a2, n1) * poisson(b2, n2 - 1);
    let y = poisson(a2, n1 - n) * poisson(b2, n2);
    (x, y)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdOptimum {
    pub alpha_abs: f64,
    pub norm: f64,
    pub weight_noclick: f64,
    pub v_click: f64,
}

/// Best no-click weight subject to full no-click visibility: outer grid over
/// `|alpha|`, inner bisection on the probe norm for equal overlaps.
pub fn threshold_grid_optimum(n1: usize, n2: usize, n: usize, resolution: usize) -> Result<ThresholdOptimum> {
    if n < 2 || n1 < n || n2 < 1 {
        return Err(Error::InvalidPhotonNumbers(format!("n1={n1}, n2={n2}, N={n}")));
    }
    let balanced_norm = |alpha: f64| -> f64 {
        // ln(x/y) grows monotonically with ln F for N > 1
        // log ratio written out so large probes do not underflow
        let beta2 = 1.0 - alpha * alpha;
        let lfac = |k: usize| (1..=k).map(|x| (x as f64).ln()).sum::<f64>();
        let gap = |lf: f64| {
            let la = lf + 2.0 * alpha.ln();
            let lb = lf + beta2.ln();
            (n as f64) * la - lb - lfac(n1) - lfac(n2 - 1) + lfac(n1 - n) + lfac(n2)
        };
        let (mut lo, mut hi) = (-40.0f64, 40.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (0.25 * (lo + hi)).exp()
    };
    let weight = |alpha: f64| {
        let (x, y) = probe_overlaps(n1, n2, n, alpha, balanced_norm(alpha));
        0.5 * (x + y)
    };
    let (alpha_abs, w) = grid_optimize(weight, (1e-6, 1.0 - 1e-6), resolution);
    let norm = balanced_norm(alpha_abs);
    let (x, y) = probe_overlaps(n1, n2, n, alpha_abs, norm);
    Ok(ThresholdOptimum { alpha_abs, norm, weight_noclick: w, v_click: (x * y).sqrt() / (1.0 - w) })
}

// ---------------------------------------------------------------- angular momentum

fn lower(j2: i32, m2: i32) -> f64 {
    // J- |j m> = sqrt(j(j+1) - m(m-1)) |j m-1>, doubled arguments
    (((j2 * (j2 + 2)) - (m2 * (m2 - 2))) as f64 / 4.0).sqrt()
}

/// Clebsch-Gordan coefficient by building each `|J M>` from the top state and
/// the lowering operator, with Gram-Schmidt for every new `J`.
pub fn cg_lowering(j1: i32, m1: i32, j2: i32, m2: i32, jj: i32, mm: i32) -> f64 {
    if m1 + m2 != mm || jj > j1 + j2 || jj < (j1 - j2).abs() || (j1 + j2 - jj) % 2 != 0 {
        return 0.0;
    }
    let n1 = (j1 + 1) as usize;
    let n2 = (j2 + 1) as usize;
    let idx = |a: i32, b: i32| ((j1 - a) / 2) as usize * n2 + ((j2 - b) / 2) as usize;
    let apply_lower = |v: &DVector<f64>| {
        let mut out = DVector::zeros(n1 * n2);
        for a in (-j1..=j1).step_by(2) {
            for b in (-j2..=j2).step_by(2) {
                let x = v[idx(a, b)];
                if x == 0.0 {
                    continue;
                }
                if a > -j1 {
                    out[idx(a - 2, b)] += lower(j1, a) * x;
                }
                if b > -j2 {
                    out[idx(a, b - 2)] += lower(j2, b) * x;
                }
            }
        }
        out
    };
    // multiplets[J] holds |J M> for M = J, J-2, ...
    let mut multiplets: Vec<(i32, Vec<DVector<f64>>)> = Vec::new();
    let mut big_j = j1 + j2;
    while big_j >= jj {
        let mut top = DVector::<f64>::zeros(n1 * n2);
        let mut found = false;
        for a in (-j1..=j1).rev().step_by(2) {
            let b = big_j - a;
            if b.abs() > j2 || (j2 - b) % 2 != 0 {
                continue;
            }
            let mut v = DVector::zeros(n1 * n2);
            v[idx(a, b)] = 1.0;
            for (jp, states) in &multiplets {
                let s = &states[((jp - big_j) / 2) as usize];
                let p = s.dot(&v);
                v -= s * p;
            }
            if v.norm() > 1e-8 {
                top = v.normalize();
                found = true;
                break;
            }
        }
        if !found {
            return 0.0;
        }
        // Condon-Shortley: <j1 j1; j2 J-j1 | J J> > 0
        if top[idx(j1, big_j - j1)] < 0.0 {
            top = -top;
        }
        let mut states = vec![top];
        let mut m = big_j;
        while m > -big_j {
            let next = apply_lower(states.last().unwrap()) / lower(big_j, m);
            states.push(next);
            m -= 2;
        }
        multiplets.push((big_j, states));
        big_j -= 2;
    }
    let (_, states) = multiplets.last().unwrap();
    if m1.abs() > j1 || m2.abs() > j2 {
        return 0.0;
    }
    states[((jj - mm) / 2) as usize][idx(m1, m2)]
}

/// Legendre polynomial from the explicit sum `2^-l sum_k (-1)^k C(l,k) C(2l-2k,l) x^(l-2k)`.
pub fn legendre_p(l: u32, x: f64) -> f64 {
    let binom = |n: u32, k: u32| -> f64 { (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product() };
    let mut s = 0.0;
    for k in 0..=l / 2 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binom(l, k) * binom(2 * l - 2 * k, l) * x.powi((l - 2 * k) as i32);
    }
    s / 2f64.powi(l as i32)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `eps . e_q^*` written out in Cartesian form.
fn eps_component(eps: &[C64; 3], q: i32) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match q {
        1 => (-eps[0] + eps[1] * C64::new(0.0, 1.0)) * s,
        -1 => (eps[0] + eps[1] * C64::new(0.0, 1.0)) * s,
        _ => eps[2],
    }
}

/// First-order dipole element as a plain nested sum with lowering-operator CG values.
pub fn a1_bruteforce(lp: i32, jp2: i32, mp2: i32, l: i32, j2: i32, m2: i32, eps: &[C64; 3]) -> C64 {
    let red = ((2 * l + 1) as f64 / (2 * lp + 1) as f64).sqrt() * cg_lowering(2 * l, 0, 2, 0, 2 * lp, 0);
    let mut s = cz();
    for ml in -l..=l {
        for q in -1..=1 {
            for ms in [-1, 1] {
                let mlp = ml + q;
                if mlp.abs() > lp {
                    continue;
                }
                let w = cg_lowering(2 * l, 2 * ml, 2, 2 * q, 2 * lp, 2 * mlp)
                    * cg_lowering(2 * lp, 2 * mlp, 1, ms, jp2, mp2)
                    * cg_lowering(2 * l, 2 * ml, 1, ms, j2, m2);
                s += eps_component(eps, q) * w;
            }
        }
    }
    s * red
}

/// Second-order element with explicit enumeration of the intermediate projection.
#[allow(clippy::too_many_arguments)]
pub fn a2_bruteforce(lp: i32, jp2: i32, mp2: i32, lpp: i32, jpp2: i32, l: i32, j2: i32, m2: i32, eps: &[C64; 3], eps_prime: &[C64; 3]) -> C64 {
    let mut s = cz();
    let mut mpp = -jpp2;
    while mpp <= jpp2 {
        s += a1_bruteforce(lp, jp2, mp2, lpp, jpp2, mpp, eps) * a1_bruteforce(lpp, jpp2, mpp, l, j2, m2, eps_prime);
        mpp += 2;
    }
    s
}

// ---------------------------------------------------------------- toy dynamics

/// Few-level material system coupled to one or two field modes in the
/// rotating-wave approximation.
#[derive(Clone, Debug)]
pub struct ToySystem {
    pub energies: Vec<f64>,
    pub mode_freqs: Vec<f64>,
    /// `couplings[(i, j)]` couples `|j>` to `|i>` when `E_i > E_j` by absorbing a photon.
    pub couplings: DMatrix<C64>,
    pub cutoff: usize,
}

impl ToySystem {
    /// Two levels split by `omega`, one resonant mode, unit dipole.
    pub fn resonant_pair(omega: f64, detuning: f64) -> Self {
        let mut d = DMatrix::zeros(2, 2);
        d[(1, 0)] = C64::new(1.0, 0.0);
        Self { energies: vec![0.0, omega], mode_freqs: vec![omega - detuning], couplings: d, cutoff: 2 }
    }

    fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.energies.len()];
        d.extend(self.mode_freqs.iter().map(|_| self.cutoff + 1));
        d
    }

    fn index(&self, level: usize, photons: &[usize]) -> usize {
        let mut i = level;
        for &p in photons {
            i = i * (self.cutoff + 1) + p;
        }
        i
    }

    /// Hamiltonian `H0 + g V` (hbar = 1).
    pub fn hamiltonian(&self, g: f64) -> Result<(DMatrix<C64>, Vec<f64>)> {
        let dim: usize = self.dims().iter().product();
        if dim > 200 || self.energies.len() < 2 || self.energies.len() > 3 || self.mode_freqs.is_empty() || self.mode_freqs.len() > 2 {
            return Err(Error::Invalid(format!("toy system too large or malformed (dim {dim})")));
        }
        let nm = self.mode_freqs.len();
        let nl = self.energies.len();
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        let mut diag = vec![0.0; dim];
        let per_level = dim / nl;
        for i in 0..dim {
            let lvl = i / per_level;
            let mut rest = i % per_level;
            let mut occ = vec![0usize; nm];
            for k in (0..nm).rev() {
                occ[k] = rest % (self.cutoff + 1);
                rest /= self.cutoff + 1;
            }
            diag[i] = self.energies[lvl] + occ.iter().zip(&self.mode_freqs).map(|(&n, w)| n as f64 * w).sum::<f64>();
            h[(i, i)] = C64::new(diag[i], 0.0);
            for k in 0..nm {
                if occ[k] == 0 {
                    continue;
                }
                for up in 0..nl {
                    let d = self.couplings[(up, lvl)];
                    if self.energies[up] <= self.energies[lvl] || d == cz() {
                        continue;
                    }
                    let mut o2 = occ.clone();
                    o2[k] -= 1;
                    let f = self.index(up, &o2);
                    let amp = d * g * (occ[k] as f64).sqrt();
                    h[(f, i)] += amp;
                    h[(i, f)] += amp.conj();
                }
            }
        }
        Ok((h, diag))
    }
}

/// Dormand-Prince 5(4) for `dy/dt = -i H y` with per-step error control.
pub fn integrate(h: &DMatrix<C64>, y0: &DVector<C64>, t_end: f64, tol: f64) -> Result<DVector<C64>> {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];
    let mi = C64::new(0.0, -1.0);
    let f = |y: &DVector<C64>| (h * y) * mi;
    let mut y = y0.clone();
    let mut t = 0.0;
    let mut dt = (t_end / 100.0).max(1e-6).min(t_end);
    if t_end <= 0.0 {
        return Ok(y);
    }
    while t < t_end {
        if t + dt > t_end {
            dt = t_end - t;
        }
        let mut k: Vec<DVector<C64>> = Vec::with_capacity(7);
        k.push(f(&y));
        for row in A.iter() {
            let mut ys = y.clone();
            for (j, a) in row.iter().enumerate() {
                if *a != 0.0 {
                    ys += &k[j] * C64::new(a * dt, 0.0);
                }
            }
            k.push(f(&ys));
        }
        let mut y5 = y.clone();
        let mut y4 = y.clone();
        for j in 0..7 {
            y5 += &k[j] * C64::new(B5[j] * dt, 0.0);
            y4 += &k[j] * C64::new(B4[j] * dt, 0.0);
        }
        let err = (&y5 - &y4).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if err <= tol || dt < 1e-300 {
            t += dt;
            y = y5;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
        dt *= factor;
        if dt < 1e-14 * t_end.max(1.0) && t < t_end {
            return Err(Error::StepSizeUnderflow(dt));
        }
    }
    Ok(y)
}

/// Interaction-picture amplitude `|level 1, photons - 1> <- |level 0, photons>`
/// after time `t` with coupling `g`, absorbing from the first mode.
pub fn toy_first_order(system: &ToySystem, g: f64, t: f64) -> Result<C64> {
    let (h, diag) = system.hamiltonian(g)?;
    let mut start = vec![0usize; system.mode_freqs.len()];
    start[0] = 1;
    let mut end = start.clone();
    end[0] = 0;
    let i0 = system.index(0, &start);
    let i1 = system.index(1, &end);
    let mut y0 = DVector::zeros(h.nrows());
    y0[i0] = C64::new(1.0, 0.0);
    let y = integrate(&h, &y0, t, 1e-12)?;
    Ok(y[i1] * C64::from_polar(1.0, diag[i1] * t))
}

/// First-order perturbative amplitude `-i g d (e^{i D t} - 1)/(i D)`, `D` the detuning.
pub fn first_order_amplitude(g_d: C64, detuning: f64, t: f64) -> C64 {
    let mi = C64::new(0.0, -1.0);
    if detuning.abs() * t < 1e-8 {
        mi * g_d * t
    } else {
        mi * g_d * (C64::from_polar(1.0, detuning * t) - 1.0) / C64::new(0.0, detuning)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lhv_pattern() {
        assert_eq!(lhv_enumerate([1, 1, 1, -1]), 2.0);
        assert_eq!(lhv_enumerate([1, 1, 1, 1]), 4.0);
    }

    #[test]
    fn grid_finds_quadratic_vertex() {
        let (x, y) = grid_optimize(|x| -(x - 0.3137).powi(2) + 2.0, (-1.0, 1.0), 50);
        assert!((x - 0.3137).abs() < 1e-7 && (y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_grid_matches_analytic_point() {
        let o = threshold_grid_optimum(2, 1, 2, 400).unwrap();
        assert!((o.alpha_abs.powi(2) - 2.0 / 3.0).abs() < 1e-6);
        assert!((o.norm.powi(2) - 1.5).abs() < 1e-6);
        assert!((o.weight_noclick - (-1.5f64).exp() / 2.0).abs() < 1e-9);
        assert!((o.v_click - 1.0 / (2.0 * 1.5f64.exp() - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn lowering_cg_examples() {
        assert!((cg_lowering(2, 0, 1, 1, 3, 1) - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((cg_lowering(2, 2, 1, -1, 1, 1) - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((cg_lowering(1, 1, 1, -1, 0, 0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn legendre_and_quadrature() {
        assert!((legendre_p(2, 0.5) - (-0.125)).abs() < 1e-15);
        let q = gauss_legendre(8);
        let integral: f64 = q.iter().map(|(x, w)| w * x.powi(6)).sum();
        assert!((integral - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn toy_resonance_and_detuning() {
        let sys = ToySystem::resonant_pair(1.0, 0.0);
        assert_eq!(toy_first_order(&sys, 0.0, 5.0).unwrap(), cz());
        let (g, t) = (0.001, 10.0);
        let a = toy_first_order(&sys, g, t).unwrap();
        let want = first_order_amplitude(C64::new(1.0, 0.0) * g, 0.0, t);
        assert!((a - want).norm() / want.norm() < 1e-4, "{a} {want}");
        let det = ToySystem::resonant_pair(1.0, 0.5);
        let (g, t) = (1e-4, 40.0);
        let a = toy_first_order(&det, g, t).unwrap();
        let want = first_order_amplitude(C64::new(g, 0.0), 0.5, t);
        assert!((a.norm() - want.norm()).abs() / want.norm() < 1e-3, "{a} {want}");
        assert!(a.norm() < 0.2 * g * t);
    }
}
