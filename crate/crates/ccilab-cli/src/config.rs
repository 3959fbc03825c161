//! Run configuration read from TOML.
//!
//! ```toml
//! seed = 7
//! out = "results"
//!
//! [erasure]
//! states = ["fock:2 fock:1 N=2", "coherent:1.0:0.0 coherent:0.8:0.0 N=2"]
//! gamma = { start = 0.0, stop = 6.283185307179586, step = 0.7853981633974483 }
//! random_instances = 4
//!
//! [threshold]
//! n1 = 2
//! n2 = 1
//! norm = { start = 0.1, stop = 2.5, step = 0.1 }
//!
//! [bell]
//! visibility = { start = 0.0, stop = 0.95, step = 0.05 }
//! phi = { values = [0.0, 0.785, 1.571] }
//! overlap = { start = 0.05, stop = 0.95, step = 0.05 }
//!
//! [alkali]
//! radial = "radial.toml"
//! geometry = "open"
//!
//! [response]
//! relative_phase = { start = -3.14159, stop = 3.14159, step = 0.2618 }
//! ```
//!
//! Every table is optional and falls back to the defaults below. A grid is
//! either `{ values = [...] }` or `{ start, stop, step }` with both ends
//! included; `--grid-step` replaces every `step`.

use std::path::{Path, PathBuf};

use ccilab::field::PhotonStatistics;
use serde::Deserialize;

#[derive(Debug)]
pub enum ConfigError {
    /// Bad values or schema: exit code 2.
    Invalid(String),
    /// Unreadable or malformed input file: exit code 3.
    Input(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Invalid(m) => write!(f, "config error: {m}"),
            ConfigError::Input(m) => write!(f, "input file error: {m}"),
        }
    }
}

fn invalid(m: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(m.into())
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged, deny_unknown_fields)]
pub enum Grid {
    Values { values: Vec<f64> },
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        Grid::Range { start, stop, step }
    }

    pub fn with_step(&self, step: Option<f64>) -> Self {
        match (self, step) {
            (Grid::Range { start, stop, .. }, Some(s)) => Grid::range(*start, *stop, s),
            _ => self.clone(),
        }
    }

    /// Sampled points; the stop value is included when it falls on the grid.
    pub fn points(&self, name: &str) -> Result<Vec<f64>, ConfigError> {
        let pts = match self {
            Grid::Values { values } => values.clone(),
            Grid::Range { start, stop, step } => {
                if !(step.is_finite() && *step > 0.0) {
                    return Err(invalid(format!("{name}: step must be positive")));
                }
                if stop < start {
                    return Err(invalid(format!("{name}: stop below start")));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                if n > 100_000 {
                    return Err(invalid(format!("{name}: more than 100000 points")));
                }
                (0..=n).map(|i| start + step * i as f64).collect()
            }
        };
        if pts.is_empty() {
            return Err(invalid(format!("{name}: empty grid")));
        }
        if pts.iter().any(|x| !x.is_finite()) {
            return Err(invalid(format!("{name}: non-finite grid value")));
        }
        Ok(pts)
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub erasure: ErasureConfig,
    #[serde(default)]
    pub threshold: ThresholdConfig,
    #[serde(default)]
    pub bell: BellConfig,
    #[serde(default)]
    pub alkali: AlkaliConfig,
    #[serde(default)]
    pub response: ResponseConfig,
    /// Directory of the config file; relative paths inside it resolve here.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErasureConfig {
    #[serde(default = "default_states")]
    pub states: Vec<String>,
    #[serde(default = "default_gamma")]
    pub gamma: Grid,
    /// Extra rows from seeded random photon statistics.
    #[serde(default)]
    pub random_instances: usize,
}

fn default_states() -> Vec<String> {
    vec![
        "fock:2 fock:1 N=2".into(),
        "fock:4 fock:2 N=3".into(),
        "coherent:1.0:0.0 coherent:0.8:0.5 N=2".into(),
        "squeezed:0.5 coherent:0.8:0.0 N=2".into(),
    ]
}

fn default_gamma() -> Grid {
    Grid::range(0.0, 2.0 * std::f64::consts::PI, std::f64::consts::PI / 8.0)
}

impl Default for ErasureConfig {
    fn default() -> Self {
        Self { states: default_states(), gamma: default_gamma(), random_instances: 0 }
    }
}

/// `"<mode1> <mode2> N=<n>"`, each mode `fock:n`, `coherent:amp:phase` or `squeezed:rho`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateSpec {
    pub mode1: PhotonStatistics,
    pub mode2: PhotonStatistics,
    pub n: usize,
}

fn parse_stats(s: &str) -> Result<PhotonStatistics, ConfigError> {
    let bad = || invalid(format!("bad photon statistics '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| parts.get(i).ok_or_else(bad)?.parse::<f64>().map_err(|_| bad());
    match parts[0] {
        "fock" if parts.len() == 2 => Ok(PhotonStatistics::Fock { n: parts[1].parse().map_err(|_| bad())? }),
        "coherent" if parts.len() == 3 => Ok(PhotonStatistics::Coherent { amplitude: num(1)?, phase: num(2)? }),
        "squeezed" if parts.len() == 2 => {
            let rho = num(1)?;
            if !(0.0..1.0).contains(&rho.abs()) {
                return Err(invalid(format!("squeezing parameter must satisfy |rho| < 1 in '{s}'")));
            }
            Ok(PhotonStatistics::SqueezedVacuum { rho })
        }
        _ => Err(bad()),
    }
}

impl StateSpec {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        let words: Vec<&str> = s.split_whitespace().collect();
        if words.len() != 3 {
            return Err(invalid(format!("state '{s}' needs '<mode1> <mode2> N=<n>'")));
        }
        let n = words[2]
            .strip_prefix("N=")
            .and_then(|x| x.parse::<usize>().ok())
            .ok_or_else(|| invalid(format!("state '{s}': bad photon number '{}'", words[2])))?;
        Ok(Self { mode1: parse_stats(words[0])?, mode2: parse_stats(words[1])?, n })
    }

    pub fn label(&self) -> String {
        let one = |g: &PhotonStatistics| match *g {
            PhotonStatistics::Fock { n } => format!("fock:{n}"),
            PhotonStatistics::Coherent { amplitude, phase } => format!("coherent:{amplitude}:{phase}"),
            PhotonStatistics::SqueezedVacuum { rho } => format!("squeezed:{rho}"),
        };
        format!("{} {} N={}", one(&self.mode1), one(&self.mode2), self.n)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    #[serde(default = "two")]
    pub n: usize,
    /// `|<f1^|f^>|`; the optimal direction is used when absent (needs `n = 2`).
    pub alpha: Option<f64>,
    #[serde(default = "default_norm")]
    pub norm: Grid,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_resolution")]
    pub grid_resolution: usize,
}

fn two() -> usize {
    2
}

fn default_norm() -> Grid {
    Grid::range(0.1, 2.5, 0.1)
}

fn default_resolution() -> usize {
    400
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self { n1: Some(2), n2: Some(1), n: 2, alpha: None, norm: default_norm(), gamma: 0.0, grid_resolution: 400 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellConfig {
    #[serde(default = "default_visibility")]
    pub visibility: Grid,
    #[serde(default = "default_phi")]
    pub phi: Grid,
    #[serde(default = "default_overlap")]
    pub overlap: Grid,
}

fn default_visibility() -> Grid {
    Grid::range(0.0, 0.95, 0.05)
}

fn default_phi() -> Grid {
    Grid::range(-std::f64::consts::PI, std::f64::consts::PI, std::f64::consts::PI / 12.0)
}

fn default_overlap() -> Grid {
    Grid::range(0.05, 0.95, 0.05)
}

impl Default for BellConfig {
    fn default() -> Self {
        Self { visibility: default_visibility(), phi: default_phi(), overlap: default_overlap() }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GeometryChoice {
    Open,
    Closed,
    Both,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ClosedChoice {
    Standard,
    Alternative,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlkaliConfig {
    /// Radial-parameter TOML; the bundled sample is used when absent.
    pub radial: Option<PathBuf>,
    #[serde(default = "open_geometry")]
    pub geometry: GeometryChoice,
    #[serde(default = "standard")]
    pub closed_mode: ClosedChoice,
    /// Doubled `m_j` values checked, default both. The closed geometry only
    /// works for `-1`; `+1` shows its bias.
    pub inputs: Option<Vec<i32>>,
    /// Extra seeded random radial draws checked on the open geometry.
    #[serde(default)]
    pub random_draws: usize,
}

fn open_geometry() -> GeometryChoice {
    GeometryChoice::Open
}

fn standard() -> ClosedChoice {
    ClosedChoice::Standard
}

impl Default for AlkaliConfig {
    fn default() -> Self {
        Self { radial: None, geometry: GeometryChoice::Open, closed_mode: ClosedChoice::Standard, inputs: None, random_draws: 0 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseConfig {
    #[serde(default = "default_w0")]
    pub w0: f64,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_chi2")]
    pub chi2: f64,
    #[serde(default = "default_chi3")]
    pub chi3: f64,
    /// Carrier frequency; the second field runs at twice this.
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default = "default_a1")]
    pub a1: f64,
    #[serde(default = "default_a2")]
    pub a2: f64,
    #[serde(default = "default_relative_phase")]
    pub relative_phase: Grid,
}

fn default_w0() -> f64 {
    1.3
}
fn default_damping() -> f64 {
    0.2
}
fn default_chi2() -> f64 {
    0.7
}
fn default_chi3() -> f64 {
    1.1
}
fn one() -> f64 {
    1.0
}
fn default_a1() -> f64 {
    0.8
}
fn default_a2() -> f64 {
    0.5
}
fn default_relative_phase() -> Grid {
    Grid::range(-std::f64::consts::PI, std::f64::consts::PI, std::f64::consts::PI / 12.0)
}

impl Default for ResponseConfig {
    fn default() -> Self {
        Self {
            w0: default_w0(),
            damping: default_damping(),
            chi2: default_chi2(),
            chi3: default_chi3(),
            omega: 1.0,
            a1: default_a1(),
            a2: default_a2(),
            relative_phase: default_relative_phase(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Input(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}
