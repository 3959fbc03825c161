//! One- vs two-photon ionization of an alkali s electron with spin readout.
//!
//! Angular momenta are doubled integers throughout (`j2 = 2j`, `m2 = 2m`), so
//! `1/2` is `1` and `3/2` is `3`. Orbital `l` is a plain integer. The common
//! energy and pulse-overlap prefactors of the amplitudes are set to one.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};


use crate::linalg::c;
use crate::{Error, Result, C64};

pub type Vec3 = [f64; 3];
pub type CVec3 = [C64; 3];

fn fact(n: i32) -> f64 {
    // exact in u128 up to 34!
    (1..=n.max(0) as u128).product::<u128>() as f64
}

fn check_jm(j2: i32, m2: i32) -> Result<()> {
    if j2 < 0 || m2.abs() > j2 || (j2 + m2) % 2 != 0 {
        return Err(Error::InvalidQuantumNumbers(format!("j={j2}/2, m={m2}/2")));
    }
    Ok(())
}

/// `<j1 m1; j2 m2 | J M>` with doubled arguments, Condon-Shortley phases.
///
/// Malformed pairs (negative `j`, `|m| > j`, `j + m` not integer) are errors;
/// a failed triangle or `M != m1 + m2` gives zero.
pub fn clebsch_gordan(j1: i32, m1: i32, j2: i32, m2: i32, jj: i32, mm: i32) -> Result<f64> {
    check_jm(j1, m1)?;
    check_jm(j2, m2)?;
    check_jm(jj, mm)?;
    if mm != m1 + m2 || jj < (j1 - j2).abs() || jj > j1 + j2 || (j1 + j2 + jj) % 2 != 0 {
        return Ok(0.0);
    }
    let h = |x: i32| x / 2;
    let pre = ((jj + 1) as f64 * fact(h(jj + j1 - j2)) * fact(h(jj - j1 + j2)) * fact(h(j1 + j2 - jj)) / fact(h(j1 + j2 + jj) + 1)).sqrt()
        * (fact(h(jj + mm)) * fact(h(jj - mm)) * fact(h(j1 - m1)) * fact(h(j1 + m1)) * fact(h(j2 - m2)) * fact(h(j2 + m2))).sqrt();
    let mut sum = 0.0;
    for k in 0..=h(j1 + j2 - jj) {
        let d = [k, h(j1 + j2 - jj) - k, h(j1 - m1) - k, h(j2 + m2) - k, h(jj - j2 + m1) + k, h(jj - j1 - m2) + k];
        if d.iter().any(|&x| x < 0) {
            continue;
        }
        let den: f64 = d.iter().map(|&x| fact(x)).product();
        sum += if k % 2 == 0 { 1.0 } else { -1.0 } / den;
    }
    Ok(pre * sum)
}

/// Zero outside the physical range instead of an error.
fn cg(j1: i32, m1: i32, j2: i32, m2: i32, jj: i32, mm: i32) -> f64 {
    clebsch_gordan(j1, m1, j2, m2, jj, mm).unwrap_or(0.0)
}

/// `Y_lm` at a unit direction, Condon-Shortley phase.
pub fn spherical_harmonic(l: u32, m: i32, dir: Vec3) -> C64 {
    let l = l as i32;
    if m.abs() > l {
        return c(0.0, 0.0);
    }
    let r = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    let x = (dir[2] / r).clamp(-1.0, 1.0);
    let phi = dir[1].atan2(dir[0]);
    let am = m.abs();
    // associated Legendre P_l^am(x) including (-1)^am
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for k in 1..=am {
        pmm *= -((2 * k - 1) as f64) * s;
    }
    let p = if l == am {
        pmm
    } else {
        let mut a = pmm;
        let mut b = x * (2 * am + 1) as f64 * pmm;
        for ll in (am + 2)..=l {
            let next = ((2 * ll - 1) as f64 * x * b - (ll + am - 1) as f64 * a) / (ll - am) as f64;
            a = b;
            b = next;
        }
        b
    };
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * fact(l - am) / fact(l + am)).sqrt();
    let y = C64::from_polar(norm * p, am as f64 * phi);
    if m >= 0 {
        y
    } else if am % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

/// Spherical basis vector `e_q`: `e_{±1} = ∓(x ± i y)/√2`, `e_0 = z`.
pub fn spherical_unit(q: i32) -> CVec3 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match q {
        1 => [c(-s, 0.0), c(0.0, -s), c(0.0, 0.0)],
        -1 => [c(s, 0.0), c(0.0, -s), c(0.0, 0.0)],
        _ => [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
    }
}

/// `eps . e_q^*`.
pub fn spherical_component(eps: &CVec3, q: i32) -> C64 {
    let e = spherical_unit(q);
    (0..3).map(|k| eps[k] * e[k].conj()).sum()
}

/// `|l j m>` with doubled `j` and `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ljm {
    pub l: u32,
    pub j2: i32,
    pub m2: i32,
}

impl Ljm {
    pub fn new(l: u32, j2: i32, m2: i32) -> Self {
        Self { l, j2, m2 }
    }
}

/// First-order angular dipole element `<l' j' m'| eps . r^ |l j m>`.
pub fn angular_a1(fin: Ljm, ini: Ljm, eps: &CVec3) -> C64 {
    let (lp, l) = (fin.l as i32, ini.l as i32);
    let pre = ((2 * l + 1) as f64 / (2 * lp + 1) as f64).sqrt() * cg(2 * l, 0, 2, 0, 2 * lp, 0);
    if pre == 0.0 {
        return c(0.0, 0.0);
    }
    let mut s = c(0.0, 0.0);
    for ml in -l..=l {
        for q in -1..=1 {
            let mlp = ml + q;
            if mlp.abs() > lp {
                continue;
            }
            let eq = spherical_component(eps, q);
            let orb = cg(2 * l, 2 * ml, 2, 2 * q, 2 * lp, 2 * mlp);
            if orb == 0.0 {
                continue;
            }
            for ms in [1, -1] {
                s += eq * orb * cg(2 * lp, 2 * mlp, 1, ms, fin.j2, fin.m2) * cg(2 * l, 2 * ml, 1, ms, ini.j2, ini.m2);
            }
        }
    }
    s * pre
}

/// Second-order element through the intermediate level `(l'', j''2)`: the
/// sum over `m''` of `A1(fin <- mid, eps) A1(mid <- ini, eps')`.
pub fn angular_a2(fin: Ljm, mid: (u32, i32), ini: Ljm, eps: &CVec3, eps_prime: &CVec3) -> C64 {
    let (lpp, jpp2) = mid;
    (-jpp2..=jpp2)
        .step_by(2)
        .map(|mpp| {
            let m = Ljm::new(lpp, jpp2, mpp);
            angular_a1(fin, m, eps) * angular_a1(m, ini, eps_prime)
        })
        .sum()
}

/// Doubled `j` values of an orbital with spin one half.
pub fn j_values(l: u32) -> Vec<i32> {
    if l == 0 {
        vec![1]
    } else {
        vec![2 * l as i32 - 1, 2 * l as i32 + 1]
    }
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometry {
    pub k_hat_1: Vec3,
    pub k_hat_2: Vec3,
    pub eps_1: CVec3,
    pub eps_2: CVec3,
    pub k_plus: Vec3,
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        for (name, k) in [("k1", &self.k_hat_1), ("k2", &self.k_hat_2), ("K+", &self.k_plus)] {
            if (dot(k, k).sqrt() - 1.0).abs() > 1e-12 {
                return Err(Error::GeometryInvalid(format!("{name} is not a unit vector")));
            }
        }
        for (name, e, k) in [("eps1", &self.eps_1, &self.k_hat_1), ("eps2", &self.eps_2, &self.k_hat_2)] {
            let n: f64 = e.iter().map(|x| x.norm_sqr()).sum();
            if (n.sqrt() - 1.0).abs() > 1e-12 {
                return Err(Error::GeometryInvalid(format!("{name} is not normalized")));
            }
            let t: C64 = (0..3).map(|i| e[i] * k[i]).sum();
            if t.norm() > 1e-12 {
                return Err(Error::GeometryInvalid(format!("{name} is not transverse ({:.2e})", t.norm())));
            }
        }
        Ok(())
    }

    fn detection() -> Vec3 {
        let s3 = 3f64.sqrt();
        [SQRT_2 / s3, 0.0, -1.0 / s3]
    }

    /// Geometry that realizes the open (particle) configuration.
    pub fn open() -> Self {
        let s3 = 3f64.sqrt();
        let r = |x: f64| c(x, 0.0);
        Self {
            k_hat_1: [-1.0 / s3, 0.0, -SQRT_2 / s3],
            k_hat_2: [0.0, 1.0, 0.0],
            eps_1: [r(0.0), r(1.0), r(0.0)],
            eps_2: [r(1.0 / s3), r(0.0), r(SQRT_2 / s3)],
            k_plus: Self::detection(),
        }
    }

    /// Geometry that realizes the closed (wave) configuration for `m_j = -1/2`.
    pub fn closed() -> Self {
        let s3 = 3f64.sqrt();
        let s14 = 14f64.sqrt();
        let a = (5.0 + 3.0 * SQRT_2).sqrt() / (s3 * s14);
        let b = (9.0 - 3.0 * SQRT_2).sqrt() / s14;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            k_hat_1: [1.0 / 3.0, 0.0, -2.0 * SQRT_2 / 3.0],
            k_hat_2: Self::detection(),
            eps_1: [c(2.0 * SQRT_2 / 3.0 * h, 0.0), c(0.0, h), c(h / 3.0, 0.0)],
            eps_2: [c(-a, 0.0), c(0.0, b), c(-SQRT_2 * a, 0.0)],
            k_plus: Self::detection(),
        }
    }
}

/// Empirical radial integrals at the detection energy.
///
/// `d1[(l', j'2)]` and `d2[(l', j'2, j''2)]`; absent channels are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RadialParams {
    pub d1: BTreeMap<(u32, i32), C64>,
    pub d2: BTreeMap<(u32, i32, i32), C64>,
}

fn parse_j(s: &str) -> Result<i32> {
    let bad = || Error::Parse(format!("bad angular momentum '{s}'"));
    match s.split_once('/') {
        Some((n, "2")) => n.trim().parse::<i32>().map_err(|_| bad()),
        Some(_) => Err(bad()),
        None => s.trim().parse::<i32>().map(|j| 2 * j).map_err(|_| bad()),
    }
}

fn fmt_j(j2: i32) -> String {
    if j2 % 2 == 0 {
        format!("{}", j2 / 2)
    } else {
        format!("{j2}/2")
    }
}

pub type D1Key = (u32, i32);
pub type D2Key = (u32, i32, i32);

impl RadialParams {
    /// Channels that enter the amplitudes for an initial s electron.
    pub fn channels() -> (Vec<D1Key>, Vec<D2Key>) {
        let d1 = j_values(1).into_iter().map(|j| (1, j)).collect();
        let mut d2 = Vec::new();
        for lp in [0u32, 2] {
            for jp in j_values(lp) {
                for jpp in j_values(1) {
                    d2.push((lp, jp, jpp));
                }
            }
        }
        (d1, d2)
    }

    /// Parse `{"D1:E+:1:3/2" = [re, im], "D2:E+:2:5/2:3/2" = [re, im], ...}`.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, [f64; 2]> = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut out = Self::default();
        for (key, [re, im]) in raw {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Parse(format!("{key}: non-finite value")));
            }
            let v = c(re, im);
            let parts: Vec<&str> = key.split(':').collect();
            if parts.len() < 2 || parts[1] != "E+" {
                return Err(Error::Parse(format!("{key}: expected an 'E+' channel")));
            }
            let l = || parts[2].parse::<u32>().map_err(|_| Error::Parse(format!("{key}: bad l")));
            match (parts[0], parts.len()) {
                ("D1", 4) => {
                    out.d1.insert((l()?, parse_j(parts[3])?), v);
                }
                ("D2", 5) => {
                    out.d2.insert((l()?, parse_j(parts[3])?, parse_j(parts[4])?), v);
                }
                _ => return Err(Error::Parse(format!("unknown channel '{key}'"))),
            }
        }
        Ok(out)
    }

    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        for ((l, j), v) in &self.d1 {
            s.push_str(&format!("\"D1:E+:{l}:{}\" = [{:?}, {:?}]\n", fmt_j(*j), v.re, v.im));
        }
        for ((l, j, jj), v) in &self.d2 {
            s.push_str(&format!("\"D2:E+:{l}:{}:{}\" = [{:?}, {:?}]\n", fmt_j(*j), fmt_j(*jj), v.re, v.im));
        }
        s
    }

    pub fn d1(&self, l: u32, j2: i32) -> C64 {
        self.d1.get(&(l, j2)).copied().unwrap_or_default()
    }

    pub fn d2(&self, l: u32, j2: i32, jj2: i32) -> C64 {
        self.d2.get(&(l, j2, jj2)).copied().unwrap_or_default()
    }

    /// All channels from a flat list in `channels()` order.
    pub fn from_values(d1: &[C64], d2: &[C64]) -> Result<Self> {
        let (k1, k2) = Self::channels();
        if d1.len() != k1.len() || d2.len() != k2.len() {
            return Err(Error::Invalid(format!("need {} D1 and {} D2 values", k1.len(), k2.len())));
        }
        Ok(Self { d1: k1.into_iter().zip(d1.iter().copied()).collect(), d2: k2.into_iter().zip(d2.iter().copied()).collect() })
    }

    /// No fine-structure splitting, with separate s- and d-wave values for
    /// the two-photon path. Spin is then conserved.
    pub fn without_spin_orbit(d1: C64, d2_s: C64, d2_d: C64) -> Self {
        let (k1, k2) = Self::channels();
        Self {
            d1: k1.into_iter().map(|k| (k, d1)).collect(),
            d2: k2.into_iter().map(|k| (k, if k.0 == 0 { d2_s } else { d2_d })).collect(),
        }
    }

    /// Fully degenerate radial integrals: `d1` and `d2` on every channel.
    pub fn degenerate(d1: C64, d2: C64) -> Self {
        Self::without_spin_orbit(d1, d2, d2)
    }

    /// Sets `D2(2, 5/2, 3/2)`; zero removes the closed-configuration bias.
    pub fn with_d2_52(mut self, v: C64) -> Self {
        self.d2.insert((2, 5, 3), v);
        self
    }

    /// Alternative constraint `D2(2,5/2,3/2) = (2/93)(9 + 5√2)(5 D2(2,3/2,1/2) + D2(2,3/2,3/2))`.
    pub fn with_alternative_constraint(self) -> Self {
        let x = self.d2(2, 3, 1) * 5.0 + self.d2(2, 3, 3);
        self.with_d2_52(x * (2.0 / 93.0 * (9.0 + 5.0 * SQRT_2)))
    }
}

/// `t[ms][mj]` with index 0 for `+1/2` and 1 for `-1/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinAmplitudeTable {
    pub t1: [[C64; 2]; 2],
    pub t2: [[C64; 2]; 2],
}

fn half_index(m2: i32) -> usize {
    if m2 > 0 {
        0
    } else {
        1
    }
}

pub const SPINS: [i32; 2] = [1, -1];

impl SpinAmplitudeTable {
    pub fn t1(&self, ms2: i32, mj2: i32) -> C64 {
        self.t1[half_index(ms2)][half_index(mj2)]
    }

    pub fn t2(&self, ms2: i32, mj2: i32) -> C64 {
        self.t2[half_index(ms2)][half_index(mj2)]
    }

    fn scale(t: &[[C64; 2]; 2]) -> f64 {
        t.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

/// One-photon amplitude for the spin projection `ms2` from `mj2`.
pub fn t1_amplitude(g: &Geometry, radial: &RadialParams, ms2: i32, mj2: i32) -> C64 {
    let ini = Ljm::new(0, 1, mj2);
    let mut s = c(0.0, 0.0);
    for mlp in -1..=1 {
        let y = spherical_harmonic(1, mlp, g.k_plus);
        for jp in j_values(1) {
            let mjp = 2 * mlp + ms2;
            if mjp.abs() > jp {
                continue;
            }
            let w = cg(2, 2 * mlp, 1, ms2, jp, mjp);
            s += y * w * angular_a1(Ljm::new(1, jp, mjp), ini, &g.eps_2) * radial.d1(1, jp);
        }
    }
    s
}

/// Two-photon amplitude through the p intermediate levels.
pub fn t2_amplitude(g: &Geometry, radial: &RadialParams, ms2: i32, mj2: i32) -> C64 {
    let ini = Ljm::new(0, 1, mj2);
    let mut s = c(0.0, 0.0);
    for lp in [0u32, 2] {
        for mlp in -(lp as i32)..=lp as i32 {
            let y = spherical_harmonic(lp, mlp, g.k_plus);
            for jp in j_values(lp) {
                let mjp = 2 * mlp + ms2;
                if mjp.abs() > jp {
                    continue;
                }
                let w = cg(2 * lp as i32, 2 * mlp, 1, ms2, jp, mjp);
                if w == 0.0 {
                    continue;
                }
                for jpp in j_values(1) {
                    let a2 = angular_a2(Ljm::new(lp, jp, mjp), (1, jpp), ini, &g.eps_1, &g.eps_1);
                    s += y * w * a2 * radial.d2(lp, jp, jpp);
                }
            }
        }
    }
    s
}

/// Both amplitude tables, common prefactors dropped.
pub fn spin_amplitudes(g: &Geometry, radial: &RadialParams) -> Result<SpinAmplitudeTable> {
    g.validate()?;
    let cells: Vec<(i32, i32)> = SPINS.iter().flat_map(|&ms| SPINS.iter().map(move |&mj| (ms, mj))).collect();
    let vals = crate::par::map(&cells, |&(ms, mj)| (t1_amplitude(g, radial, ms, mj), t2_amplitude(g, radial, ms, mj)));
    let mut t = SpinAmplitudeTable { t1: [[C64::default(); 2]; 2], t2: [[C64::default(); 2]; 2] };
    for (&(ms, mj), (a, b)) in cells.iter().zip(vals) {
        t.t1[half_index(ms)][half_index(mj)] = a;
        t.t2[half_index(ms)][half_index(mj)] = b;
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Configuration {
    Open,
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedMode {
    /// `T2(+) = -T2(-)`.
    Standard,
    /// Only `|T2(+)| = |T2(-)|`; the relative phase is reported.
    Alternative,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub mj2: i32,
    /// Relative to the largest entry of the table involved.
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigReport {
    pub checks: Vec<Check>,
    /// Per `m_j`: `|T1| / |T2|` on the nonzero entries, i.e. the required
    /// ratio `‖chi2‖ / ‖chi1‖` of outgoing field norms.
    pub balance: Vec<(i32, Option<f64>)>,
    /// Per `m_j`, alternative closed mode: `Arg(T2(+)/T2(-))`.
    pub relative_phase: Vec<(i32, f64)>,
    pub warnings: Vec<String>,
}

impl ConfigReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub const CONFIG_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub mode: ClosedMode,
    /// Doubled `m_j` values of the input; the others are not checked.
    pub inputs: &'static [i32],
    /// `(‖chi1‖, ‖chi2‖)` for the magnitude balance of the open configuration.
    pub field_norms: Option<(f64, f64)>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { mode: ClosedMode::Standard, inputs: &SPINS, field_norms: None }
    }
}

/// Bias, sign and balance conditions of a configuration.
pub fn verify_configuration(t: &SpinAmplitudeTable, which: Configuration, opts: &VerifyOptions) -> ConfigReport {
    let mut rep = ConfigReport::default();
    let s1 = SpinAmplitudeTable::scale(&t.t1);
    let s2 = SpinAmplitudeTable::scale(&t.t2);
    if s1 == 0.0 || s2 == 0.0 {
        rep.warnings.push(format!("zero amplitudes (max |t1| = {s1:e}, max |t2| = {s2:e})"));
    }
    let rel = |x: f64, s: f64| if s > 0.0 { x / s } else { 0.0 };
    let mut push = |name: &str, mj2: i32, r: f64| {
        rep.checks.push(Check { name: name.into(), mj2, residual: r, pass: r <= CONFIG_TOL });
    };
    for &mj in opts.inputs {
        match which {
            Configuration::Open => {
                push("t1 vanishes for m_s = m_j", mj, rel(t.t1(mj, mj).norm(), s1));
                push("t2 vanishes for m_s = -m_j", mj, rel(t.t2(-mj, mj).norm(), s2));
                push("t1 antisymmetric", mj, rel((t.t1(-mj, mj) + t.t1(mj, -mj)).norm(), s1));
                if let Some((n1, n2)) = opts.field_norms {
                    let a = n1 * t.t1(-mj, mj).norm();
                    let b = n2 * t.t2(mj, mj).norm();
                    push("magnitude balance", mj, rel((a - b).abs(), a.max(b)));
                }
            }
            Configuration::Closed => {
                push("t1 unbiased", mj, rel((t.t1(1, mj) - t.t1(-1, mj)).norm(), s1));
                match opts.mode {
                    ClosedMode::Standard => push("t2 unbiased, opposite sign", mj, rel((t.t2(1, mj) + t.t2(-1, mj)).norm(), s2)),
                    ClosedMode::Alternative => {
                        push("t2 equal magnitude", mj, rel((t.t2(1, mj).norm() - t.t2(-1, mj).norm()).abs(), s2));
                        rep.relative_phase.push((mj, (t.t2(1, mj) / t.t2(-1, mj)).arg()));
                    }
                }
            }
        }
    }
    for &mj in opts.inputs {
        let (a, b) = match which {
            Configuration::Open => (t.t1(-mj, mj).norm(), t.t2(mj, mj).norm()),
            Configuration::Closed => (t.t1(1, mj).norm(), t.t2(1, mj).norm()),
        };
        rep.balance.push((mj, if b > 0.0 { Some(a / b) } else { None }));
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draw(seed: u64) -> RadialParams {
        // small LCG keeps the lib free of an RNG dependency
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let d1: Vec<C64> = (0..2).map(|_| c(next(), next())).collect();
        let d2: Vec<C64> = (0..6).map(|_| c(next(), next())).collect();
        RadialParams::from_values(&d1, &d2).unwrap()
    }

    #[test]
    fn cg_examples() {
        assert!((clebsch_gordan(2, 0, 1, 1, 3, 1).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((clebsch_gordan(2, 2, 1, -1, 1, 1).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(clebsch_gordan(2, 2, 1, 1, 3, 1).unwrap(), 0.0);
        assert!(matches!(clebsch_gordan(2, 3, 1, 1, 3, 1), Err(Error::InvalidQuantumNumbers(_))));
        assert!(matches!(clebsch_gordan(1, 3, 1, 1, 2, 2), Err(Error::InvalidQuantumNumbers(_))));
    }

    #[test]
    fn harmonics_examples() {
        let z = [0.0, 0.0, 1.0];
        assert!((spherical_harmonic(0, 0, [0.3, 0.4, 0.866]).re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
        assert!((spherical_harmonic(1, 0, z).re - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        let x = [1.0, 0.0, 0.0];
        assert!((spherical_harmonic(1, 1, x).re + (3.0 / (8.0 * PI)).sqrt()).abs() < 1e-15);
        assert!((spherical_harmonic(1, -1, x).re - (3.0 / (8.0 * PI)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn selection_rules() {
        let z = [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        for mj in SPINS {
            for jp in j_values(1) {
                for mp in (-jp..=jp).step_by(2) {
                    let a = angular_a1(Ljm::new(1, jp, mp), Ljm::new(0, 1, mj), &z);
                    if mp != mj {
                        assert!(a.norm() < 1e-15);
                    }
                }
                assert_eq!(angular_a1(Ljm::new(2, 3, mj), Ljm::new(0, 1, mj), &z), c(0.0, 0.0));
            }
            assert!(angular_a2(Ljm::new(1, 1, mj), (1, 1), Ljm::new(0, 1, mj), &z, &z).norm() < 1e-15);
        }
    }

    #[test]
    fn geometries_are_valid() {
        Geometry::open().validate().unwrap();
        Geometry::closed().validate().unwrap();
        let mut g = Geometry::open();
        g.eps_2 = g.eps_1;
        g.k_hat_2 = [1.0, 0.0, 0.0];
        g.eps_2 = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert!(matches!(g.validate(), Err(Error::GeometryInvalid(_))));
    }

    #[test]
    fn open_pattern_and_prefactors() {
        for seed in 1..4 {
            let r = draw(seed);
            let t = spin_amplitudes(&Geometry::open(), &r).unwrap();
            let rep = verify_configuration(&t, Configuration::Open, &VerifyOptions::default());
            assert!(rep.passed(), "{rep:?}");
            let k1 = t.t1(1, -1) / (r.d1(1, 3) - r.d1(1, 1));
            assert!((k1 - 1.0 / (6.0 * PI.sqrt())).norm() < 1e-12);
            let comb = r.d2(0, 1, 1) * 5.0 + r.d2(0, 1, 3) * 10.0 - r.d2(2, 3, 1) * 5.0 - r.d2(2, 3, 3) - r.d2(2, 5, 3) * 9.0;
            assert!((t.t2(1, 1) / comb - 1.0 / (90.0 * PI.sqrt())).norm() < 1e-12);
        }
    }

    #[test]
    fn closed_pattern() {
        let k = 1.0 + SQRT_2;
        for seed in 4..7 {
            let r = draw(seed);
            let t = spin_amplitudes(&Geometry::closed(), &r).unwrap();
            let scale = t.t1(-1, 1).norm();
            assert!((t.t1(1, 1) * k - t.t1(-1, 1)).norm() < 1e-12 * scale);
            assert!((t.t1(1, 1) + t.t1(1, -1)).norm() < 1e-12 * scale);
            assert!((t.t1(1, -1) - t.t1(-1, -1)).norm() < 1e-12 * scale);
            let rep = verify_configuration(&t, Configuration::Closed, &VerifyOptions::default());
            assert!(rep.checks.iter().any(|c| c.mj2 == 1 && !c.pass));
            let fixed = spin_amplitudes(&Geometry::closed(), &r.clone().with_d2_52(c(0.0, 0.0))).unwrap();
            let rep = verify_configuration(&fixed, Configuration::Closed, &VerifyOptions { inputs: &[-1], ..Default::default() });
            assert!(rep.passed(), "{rep:?}");
            let x = r.d2(2, 3, 1) * 5.0 + r.d2(2, 3, 3);
            assert!((fixed.t2(1, -1) / (x * k) + 1.0 / (180.0 * PI.sqrt())).norm() < 1e-12);
        }
    }

    #[test]
    fn alternative_constraint() {
        let r = draw(9).with_alternative_constraint();
        let t = spin_amplitudes(&Geometry::closed(), &r).unwrap();
        let rep = verify_configuration(&t, Configuration::Closed, &VerifyOptions { mode: ClosedMode::Alternative, inputs: &[-1], field_norms: None });
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.relative_phase[0].1.abs() < 1e-9);
    }

    #[test]
    fn spin_orbit_off_kills_open_amplitudes() {
        let r = RadialParams::without_spin_orbit(c(0.7, -0.2), c(0.3, 0.9), c(-1.1, 0.4));
        let t = spin_amplitudes(&Geometry::open(), &r).unwrap();
        for mj in SPINS {
            assert!(t.t1(-mj, mj).norm() < 1e-12 && t.t2(-mj, mj).norm() < 1e-12);
            assert!(t.t2(mj, mj).norm() > 1e-3);
        }
        let r = RadialParams::degenerate(c(0.7, -0.2), c(0.3, 0.9));
        let t = spin_amplitudes(&Geometry::open(), &r).unwrap();
        for ms in SPINS {
            for mj in SPINS {
                assert!(t.t1(ms, mj).norm() < 1e-12 && t.t2(ms, mj).norm() < 1e-12, "{ms} {mj} {} {}", t.t1(ms, mj), t.t2(ms, mj));
            }
        }
    }

    #[test]
    fn radial_toml_round_trip() {
        let r = draw(11);
        let back = RadialParams::from_toml(&r.to_toml()).unwrap();
        assert_eq!(back, r);
        assert!(matches!(RadialParams::from_toml("\"D3:E+:1:1/2\" = [1.0, 0.0]"), Err(Error::Parse(_))));
        assert!(matches!(RadialParams::from_toml("\"D1:E-:1:1/2\" = [1.0, 0.0]"), Err(Error::Parse(_))));
        assert!(matches!(RadialParams::from_toml("not toml"), Err(Error::Parse(_))));
    }

    #[test]
    fn zero_table_warns() {
        let t = SpinAmplitudeTable { t1: [[C64::default(); 2]; 2], t2: [[C64::default(); 2]; 2] };
        let rep = verify_configuration(&t, Configuration::Open, &VerifyOptions::default());
        assert!(rep.passed() && !rep.warnings.is_empty());
    }
}
