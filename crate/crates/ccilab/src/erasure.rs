//! Welcher-weg and erasure measurements on the radiation field, the
//! displaced photon threshold scheme, and the nonerasing counterexample.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::cci::{path_to_label, Branch, CciState, Schmidt, SymmetricCci};
use crate::field::{coherent_state, factorial, outgoing_pair, EffectiveModeBasis, FieldState, PhotonStatistics};
use crate::linalg::{c, cis};
pub use crate::observable::{FieldObservable, ObservableKind};
use crate::{Error, Result, C64};

/// `(|chiN^><chiN^| - |chi1^><chi1^|) / sqrt(1 - V^2)`, dichotomous on the span of the pair.
pub fn optimal_ww_observable(chi1: &FieldState, chin: &FieldState) -> Result<FieldObservable> {
    let a = chi1.normalized()?;
    let b = chin.normalized()?;
    let v = a.inner(&b).norm();
    if v >= 1.0 - 1e-9 {
        return Err(Error::Indistinguishable);
    }
    let k = C64::from(1.0 / (1.0 - v * v).sqrt());
    Ok(FieldObservable::new(0.0, vec![(k, b.clone(), b), (-k, a.clone(), a)], ObservableKind::Dichotomous))
}

/// `|+_R><+_R|`.
pub fn erasure_projector(s: &Schmidt) -> Result<FieldObservable> {
    FieldObservable::projector_onto(&s.r_plus)
}

/// Port statistics sorted by the outcome of a field projector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionedPorts {
    /// Populations of ports `(+1, -1)` given outcome 1; `None` at zero weight.
    pub click: Option<[f64; 2]>,
    /// Same for outcome 0.
    pub noclick: Option<[f64; 2]>,
    /// `(P(1), P(0))`.
    pub weights: [f64; 2],
}

impl ConditionedPorts {
    /// `w1 * click + w0 * noclick`, which must equal the unconditioned ports.
    pub fn recombined(&self) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (w, p) in [(self.weights[0], self.click), (self.weights[1], self.noclick)] {
            if let Some(p) = p {
                out[0] += w * p[0];
                out[1] += w * p[1];
            }
        }
        out
    }
}

pub fn conditioned_ports(state: &CciState, o: &FieldObservable) -> Result<ConditionedPorts> {
    o.check_projector()?;
    let comp = o.complement();
    let split = |obs: &FieldObservable| {
        let joint = [state.joint_port_population(1, obs), state.joint_port_population(-1, obs)];
        let w = joint[0] + joint[1];
        (w, if w > 1e-14 { Some([joint[0] / w, joint[1] / w]) } else { None })
    };
    let (w1, p1) = split(o);
    let (w0, p0) = split(&comp);
    Ok(ConditionedPorts { click: p1, noclick: p0, weights: [w1, w0] })
}

/// Closed-form and explicitly projected quantities of the threshold scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdReport {
    pub v_noclick: f64,
    pub v_click: f64,
    pub weight_noclick: f64,
    pub aux_norm: f64,
    pub alpha_abs: f64,
    pub beta_abs: f64,
    pub u: Option<f64>,
    /// The same three numbers from projecting the assembled state onto `|f>`.
    pub explicit_v_noclick: f64,
    pub explicit_v_click: f64,
    pub explicit_weight_noclick: f64,
}

impl ThresholdReport {
    /// Largest disagreement between closed form and projection.
    pub fn agreement(&self) -> f64 {
        (self.v_noclick - self.explicit_v_noclick)
            .abs()
            .max((self.v_click - self.explicit_v_click).abs())
            .max((self.weight_noclick - self.explicit_weight_noclick).abs())
    }
}

fn check_numbers(n1: usize, n2: usize, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidPhotonNumbers(format!("N = {n} must be at least 2")));
    }
    if n1 < n || n2 < 1 {
        return Err(Error::InvalidPhotonNumbers(format!("need n1 >= N and n2 >= 1, got n1 = {n1}, n2 = {n2}")));
    }
    Ok(())
}

/// Closed-form no-click weight and visibility for Fock inputs.
///
/// Returns `(weight, v_noclick)`. The weight is `(|<chi1^|f>|^2 + |<chiN^|f>|^2)/2`.
pub fn threshold_closed_form(n1: usize, n2: usize, n: usize, alpha_abs: f64, beta_abs: f64, norm: f64) -> (f64, f64) {
    let a = norm * alpha_abs;
    let b = norm * beta_abs;
    let f1 = factorial(n1);
    let fd = factorial(n1 - n);
    let n2f = n2 as f64;
    let base = (-norm * norm).exp() * a.powi(2 * (n1 - n) as i32) * b.powi(2 * (n2 - 1) as i32)
        / (f1 * fd * factorial(n2));
    let bracket = fd * n2f * a.powi(2 * n as i32) + f1 * b * b;
    let weight = base * bracket / 2.0;
    let v = if bracket > 0.0 { 2.0 * (f1 * fd * n2f).sqrt() * a.powi(n as i32) * b / bracket } else { 0.0 };
    (weight, v)
}

/// Displaced threshold detection on the symmetric Fock state.
///
/// `overlaps = (|<f1^|f^>|, |<f2^|f^>|)` fix the direction of the auxiliary
/// mode, `phases` are the arguments of those overlaps, `gamma` the symmetry phase.
pub fn threshold_scheme(
    n1: usize,
    n2: usize,
    n: usize,
    overlaps: (f64, f64),
    aux_norm: f64,
    phases: (f64, f64),
    gamma: f64,
) -> Result<ThresholdReport> {
    check_numbers(n1, n2, n)?;
    let (alpha, beta) = overlaps;
    if alpha < 0.0 || beta < 0.0 || alpha * alpha + beta * beta > 1.0 + 1e-12 {
        return Err(Error::DirectionUnreachable);
    }
    let (weight, v_nc) = threshold_closed_form(n1, n2, n, alpha, beta, aux_norm);
    let v_click = if weight < 1.0 { weight * v_nc / (1.0 - weight) } else { 0.0 };

    let two = EffectiveModeBasis::orthonormal(&["f1", "f2"]);
    let (chi1, chin) = outgoing_pair(PhotonStatistics::Fock { n: n1 }, PhotonStatistics::Fock { n: n2 }, n, &two, None)?;
    let (basis, dir) = two.extend("f", &[cis(phases.0) * alpha, cis(phases.1) * beta])?;
    let (chi1, chin) = if basis.len() == 3 {
        (chi1.with_vacuum_modes(&["f_perp"]), chin.with_vacuum_modes(&["f_perp"]))
    } else {
        (chi1, chin)
    };
    let f = coherent_state(dir.as_slice(), aux_norm, &basis, None)?;
    let state = SymmetricCci::new(&chi1, &chin, gamma)?.state()?;
    let p = FieldObservable::projector_onto(&f)?;
    let [(w_nc, v_nc_x), (_, v_c_x)] = crate::cci::conditioned_visibility(&state, &p)?;

    Ok(ThresholdReport {
        v_noclick: v_nc,
        v_click,
        weight_noclick: weight,
        aux_norm,
        alpha_abs: alpha,
        beta_abs: beta,
        u: None,
        explicit_v_noclick: v_nc_x.unwrap_or(0.0),
        explicit_v_click: v_c_x.unwrap_or(0.0),
        explicit_weight_noclick: w_nc,
    })
}

/// Auxiliary norm at which the no-click visibility reaches 1.
pub fn optimal_aux_norm(n1: usize, n2: usize, n: usize, overlaps: (f64, f64)) -> Result<f64> {
    check_numbers(n1, n2, n)?;
    let (alpha, beta) = overlaps;
    if alpha <= 0.0 || beta <= 0.0 {
        return Err(Error::DirectionUnreachable);
    }
    let inner = alpha.powi(n as i32) / beta * (n2 as f64 * factorial(n1 - n) / factorial(n1)).sqrt();
    Ok(inner.powf(1.0 / (1.0 - n as f64)))
}

/// Direction maximizing the no-click weight for `N = 2`: `(|alpha|, |beta|, u)`.
pub fn optimal_aux_direction(n1: usize, n2: usize) -> Result<(f64, f64, f64)> {
    check_numbers(n1, n2, 2)?;
    let (a, b) = (n1 as f64, n2 as f64);
    let u = 0.25 * (3.0 + (1.0 + 8.0 * b * (a + 2.0 * b - 2.0) / (a * (a - 1.0))).sqrt());
    Ok((1.0 / u.sqrt(), (1.0 - 1.0 / u).sqrt(), u))
}

/// Closed-form maximum of the no-click weight for `N = 2`.
pub fn max_noclick_weight(n1: usize, n2: usize) -> Result<f64> {
    let (_, _, u) = optimal_aux_direction(n1, n2)?;
    let (a, b) = (n1 as f64, n2 as f64);
    let r = a * (a - 1.0) / b;
    Ok((u - 1.0).powi((n1 + 2 * n2 - 2) as i32) / (factorial(n1) * factorial(n2 - 1))
        * r.powi((n1 + n2 - 1) as i32)
        * (-r * u * (u - 1.0)).exp())
}

/// Threshold scheme at the analytic optimum for `N = 2`.
pub fn threshold_optimum(n1: usize, n2: usize, gamma: f64) -> Result<ThresholdReport> {
    let (alpha, beta, u) = optimal_aux_direction(n1, n2)?;
    let norm = optimal_aux_norm(n1, n2, 2, (alpha, beta))?;
    let mut r = threshold_scheme(n1, n2, 2, (alpha, beta), norm, (0.0, 0.0), gamma)?;
    r.u = Some(u);
    Ok(r)
}

/// Equal mixture of the symmetric state and its label-swapped partner.
///
/// Neither component carries which-path information once averaged, yet
/// conditioning on `|+_R>` can restore fringes.
pub fn nonerasing_counterexample(gamma: f64, chi1: &FieldState, chin: &FieldState) -> Result<CciState> {
    let a = chi1.normalized()?;
    let b = chin.normalized()?;
    let s = FRAC_1_SQRT_2;
    let zero = c(0.0, 0.0);
    let lead = c(s, 0.0);
    let tail = -cis(gamma) * s;
    let first = Branch { weight: 0.5, amps: vec![path_to_label([lead, zero]), path_to_label([zero, tail])] };
    let second = Branch { weight: 0.5, amps: vec![path_to_label([zero, tail]), path_to_label([lead, zero])] };
    let ov = a.inner(&b);
    let phi = if ov.norm() > 0.0 { Some(ov.arg()) } else { None };
    Ok(CciState::from_branches(&[a, b], &[first, second])?.with_phases(phi, Some(gamma)))
}
