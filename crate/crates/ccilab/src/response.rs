//! Truncated Volterra response to cw line spectra.
//!
//! A real field `E(t) = sum_k a_k exp(-i w_k t)` with lines in conjugate
//! pairs drives a response
//! `O(t) = R0 + sum R2(w1, w1+w2) a1 a2 e^{-i(w1+w2)t} + sum R3(...) a1 a2 a3 e^{...}`.
//! Phase sensitivity of the cross term is already present in this classical
//! description.

use crate::linalg::c;
use crate::{Error, Result, C64};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Spectrum {
    lines: Vec<(f64, C64)>,
}

impl Spectrum {
    /// Explicit lines; every line at `w` needs a conjugate partner at `-w`.
    pub fn new(lines: Vec<(f64, C64)>) -> Result<Self> {
        for &(w, a) in &lines {
            let partner: C64 = lines.iter().filter(|(v, _)| (v + w).abs() <= 1e-12 * w.abs().max(1.0)).map(|(_, b)| *b).sum();
            let own: C64 = lines.iter().filter(|(v, _)| (v - w).abs() <= 1e-12 * w.abs().max(1.0)).map(|(_, b)| *b).sum();
            if (partner - own.conj()).norm() > 1e-12 * a.norm().max(1.0) {
                return Err(Error::Invalid(format!("line at {w} lacks its conjugate partner")));
            }
        }
        Ok(Self { lines })
    }

    /// `a cos(w t + phase)` per entry, i.e. lines `a/2 e^{∓i phase}` at `±w`.
    pub fn cosines(parts: &[(f64, f64, f64)]) -> Self {
        let mut lines = Vec::new();
        for &(w, a, phase) in parts {
            let z = C64::from_polar(a / 2.0, -phase);
            lines.push((w, z));
            lines.push((-w, z.conj()));
        }
        Self { lines }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn lines(&self) -> &[(f64, C64)] {
        &self.lines
    }

    pub fn sum(&self, other: &Spectrum) -> Spectrum {
        let mut lines = self.lines.clone();
        lines.extend_from_slice(&other.lines);
        Spectrum { lines }
    }

    /// Time signal.
    pub fn field(&self, t: f64) -> f64 {
        self.lines.iter().map(|&(w, a)| (a * C64::from_polar(1.0, -w * t)).re).sum()
    }
}

/// `a(w) -> a(w) exp(i sgn(w) phi)`.
pub fn phase_shift(s: &Spectrum, phi: f64) -> Spectrum {
    let lines = s.lines.iter().map(|&(w, a)| (w, a * C64::from_polar(1.0, w.signum() * phi))).collect();
    Spectrum { lines }
}

pub type Kernel2 = Box<dyn Fn(f64, f64) -> C64 + Send + Sync>;
pub type Kernel3 = Box<dyn Fn(f64, f64, f64) -> C64 + Send + Sync>;

pub struct KernelSet {
    pub r0: f64,
    pub r2: Kernel2,
    pub r3: Kernel3,
}

impl KernelSet {
    pub fn constant(r0: f64) -> Self {
        Self { r0, r2: Box::new(|_, _| c(0.0, 0.0)), r3: Box::new(|_, _, _| c(0.0, 0.0)) }
    }

    /// Damped anharmonic oscillator: products of `1/(w0^2 - w^2 - i g w)` at the
    /// cumulative frequencies, scaled by `chi2` and `chi3`.
    pub fn anharmonic(w0: f64, damping: f64, chi2: f64, chi3: f64) -> Self {
        let l = move |w: f64| c(1.0, 0.0) / c(w0 * w0 - w * w, -damping * w);
        Self {
            r0: 0.0,
            r2: Box::new(move |a, b| l(a) * l(b) * chi2),
            r3: Box::new(move |a, b, d| l(a) * l(b) * l(d) * chi3),
        }
    }
}

/// Lines tagged with their source, so cross terms can be selected.
fn tagged(parts: &[&Spectrum]) -> Vec<(usize, f64, C64)> {
    parts.iter().enumerate().flat_map(|(i, s)| s.lines.iter().map(move |&(w, a)| (i, w, a))).collect()
}

/// Sum of the Volterra terms; `keep` sees the source mask and total frequency.
fn volterra(k: &KernelSet, lines: &[(usize, f64, C64)], t: Option<f64>, keep: &dyn Fn(u32) -> bool) -> f64 {
    let osc = |w: f64| match t {
        Some(t) => Some(C64::from_polar(1.0, -w * t)),
        None => (w.abs() <= 1e-9).then_some(c(1.0, 0.0)),
    };
    let mut acc = c(0.0, 0.0);
    for &(s1, w1, a1) in lines {
        for &(s2, w2, a2) in lines {
            let w12 = w1 + w2;
            if keep(1 << s1 | 1 << s2) {
                if let Some(e) = osc(w12) {
                    acc += (k.r2)(w1, w12) * a1 * a2 * e;
                }
            }
            for &(s3, w3, a3) in lines {
                if keep(1 << s1 | 1 << s2 | 1 << s3) {
                    let w = w12 + w3;
                    if let Some(e) = osc(w) {
                        acc += (k.r3)(w1, w12, w) * a1 * a2 * a3 * e;
                    }
                }
            }
        }
    }
    acc.re
}

pub fn response(k: &KernelSet, s: &Spectrum, t: f64) -> f64 {
    k.r0 + volterra(k, &tagged(&[s]), Some(t), &|_| true)
}

/// Time average of the response: only the zero-frequency combinations survive.
pub fn time_average(k: &KernelSet, s: &Spectrum) -> f64 {
    k.r0 + volterra(k, &tagged(&[s]), None, &|_| true)
}

/// Terms that need both fields, `O - O1 - O2 + R0`.
pub fn cross_term(k: &KernelSet, e1: &Spectrum, e2: &Spectrum, t: f64) -> f64 {
    volterra(k, &tagged(&[e1, e2]), Some(t), &|m| m == 0b11)
}

pub fn cross_average(k: &KernelSet, e1: &Spectrum, e2: &Spectrum) -> f64 {
    volterra(k, &tagged(&[e1, e2]), None, &|m| m == 0b11)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CosineFit {
    pub amplitude: f64,
    pub theta: f64,
    /// Largest absolute deviation from `A cos(x - theta)`.
    pub residual: f64,
}

/// Least-squares `y ≈ A cos(x - theta)`.
pub fn fit_cosine(xs: &[f64], ys: &[f64]) -> Result<CosineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Invalid("cosine fit needs at least two matched samples".into()));
    }
    let (mut cc, mut cs, mut ss, mut yc, mut ysn) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (s, co) = x.sin_cos();
        cc += co * co;
        cs += co * s;
        ss += s * s;
        yc += y * co;
        ysn += y * s;
    }
    let det = cc * ss - cs * cs;
    if det.abs() < 1e-14 {
        return Err(Error::Invalid("degenerate sample points".into()));
    }
    let a = (yc * ss - ysn * cs) / det;
    let b = (ysn * cc - yc * cs) / det;
    let amplitude = a.hypot(b);
    let theta = b.atan2(a);
    let residual = xs.iter().zip(ys).map(|(&x, &y)| (y - amplitude * (x - theta).cos()).abs()).fold(0.0, f64::max);
    Ok(CosineFit { amplitude, theta, residual })
}
