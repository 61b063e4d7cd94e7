//! Run configuration: one TOML file per invocation.
//!
//! ```toml
//! output = "out"
//!
//! [laws.phase]
//! gamma_plus = 2.0
//! gamma_minus = 2.0
//! [laws.cap]
//! f1 = 0.0
//! fp = 1.0
//! [laws.visc]
//! mu_plus = 2.0
//! mu_minus = 2.0
//! lambda_plus = 0.0
//! lambda_minus = 0.0
//!
//! [grid]
//! n = 32
//!
//! [experiment]
//! eps = 5e-4
//! eps0 = 0.05
//! ```
//!
//! A `[direct]` table with `beta = [b1, b2, b3, b4]`, `nu_plus` and
//! `nu_minus` replaces `[laws]` for abstract coefficient sets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twofluid::{Laws, LocalClosure, ModelCoefficients};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub laws: Option<Laws>,
    #[serde(default)]
    pub direct: Option<DirectCoefficients>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub experiment: Experiment,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

/// Scaled coefficients given directly. Without explicit `nu1_*` the
/// viscosity splits evenly into `ν₁ = ν₂ = ν/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectCoefficients {
    pub beta: [f64; 4],
    pub nu_plus: f64,
    pub nu_minus: f64,
    #[serde(default)]
    pub nu1_plus: Option<f64>,
    #[serde(default)]
    pub nu1_minus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    /// Box side; defaults to `4π/η` so the mode shell spans six lattice
    /// shells.
    #[serde(default)]
    pub box_len: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: default_n(), box_len: None }
    }
}

/// Initial data of the evolution commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialData {
    /// `H⁴`-normalised growing mode times `eps`.
    #[default]
    Mode,
    /// Seeded random dealiased field with `L²` norm `eps`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    /// Shell parameter of the growing mode; derived from `vartheta` when
    /// absent.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Growth margin `ϑ`; defaults to `θ/10`.
    #[serde(default)]
    pub vartheta: Option<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    /// Steps between series samples.
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Samples between field snapshots.
    #[serde(default)]
    pub snapshot_every: Option<usize>,
    /// Duhamel sample spacings in steps.
    #[serde(default)]
    pub duhamel_steps: Vec<usize>,
    #[serde(default)]
    pub init: InitialData,
    #[serde(default)]
    pub seed: u64,
}

impl Default for Experiment {
    fn default() -> Self {
        Self {
            eta: None,
            vartheta: None,
            eps: default_eps(),
            eps0: default_eps0(),
            t_end: None,
            dt: None,
            stride: default_stride(),
            snapshot_every: None,
            duhamel_steps: Vec::new(),
            init: InitialData::default(),
            seed: 0,
        }
    }
}

fn default_output() -> PathBuf {
    PathBuf::from("twofluid-out")
}
fn default_n() -> usize {
    32
}
fn default_eps() -> f64 {
    5e-4
}
fn default_eps0() -> f64 {
    0.05
}
fn default_stride() -> usize {
    1
}

/// Coefficients of a run together with the laws they came from, if any.
#[derive(Debug, Clone)]
pub struct Model {
    pub laws: Option<(Laws, LocalClosure)>,
    pub c: ModelCoefficients,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.laws, &self.direct) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either [laws] or [direct], not both".into())),
            (None, None) => return Err(CliError::Config("one of [laws] or [direct] is required".into())),
            _ => {}
        }
        for (name, v) in self.numbers() {
            if !v.is_finite() {
                return Err(CliError::Config(format!("{name} must be finite, got {v}")));
            }
        }
        if self.grid.n < 8 || !self.grid.n.is_power_of_two() {
            return Err(CliError::Config(format!("grid.n must be a power of two >= 8, got {}", self.grid.n)));
        }
        let e = &self.experiment;
        if e.stride == 0 || e.snapshot_every == Some(0) || e.duhamel_steps.contains(&0) {
            return Err(CliError::Config("strides must be positive".into()));
        }
        if !(e.eps > 0.0) || !(e.eps0 > 0.0) {
            return Err(CliError::Config("eps and eps0 must be positive".into()));
        }
        for (name, v) in [("grid.box_len", self.grid.box_len), ("experiment.eta", e.eta), ("experiment.dt", e.dt)] {
            if matches!(v, Some(x) if x <= 0.0) {
                return Err(CliError::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    fn numbers(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        if let Some(l) = &self.laws {
            out.extend([
                ("laws.phase.gamma_plus", l.phase.gamma_plus),
                ("laws.phase.gamma_minus", l.phase.gamma_minus),
                ("laws.cap.f1", l.cap.f1),
                ("laws.cap.fp", l.cap.fp),
                ("laws.cap.c2", l.cap.c2),
                ("laws.cap.c3", l.cap.c3),
                ("laws.visc.mu_plus", l.visc.mu_plus),
                ("laws.visc.mu_minus", l.visc.mu_minus),
                ("laws.visc.lambda_plus", l.visc.lambda_plus),
                ("laws.visc.lambda_minus", l.visc.lambda_minus),
            ]);
        }
        if let Some(d) = &self.direct {
            out.extend(d.beta.iter().map(|&b| ("direct.beta", b)));
            out.extend([("direct.nu_plus", d.nu_plus), ("direct.nu_minus", d.nu_minus)]);
            out.extend(d.nu1_plus.map(|v| ("direct.nu1_plus", v)));
            out.extend(d.nu1_minus.map(|v| ("direct.nu1_minus", v)));
        }
        let e = &self.experiment;
        out.extend([("experiment.eps", e.eps), ("experiment.eps0", e.eps0)]);
        for (name, v) in [
            ("grid.box_len", self.grid.box_len),
            ("experiment.eta", e.eta),
            ("experiment.vartheta", e.vartheta),
            ("experiment.t_end", e.t_end),
            ("experiment.dt", e.dt),
        ] {
            out.extend(v.map(|x| (name, x)));
        }
        out
    }

    /// Linearises the laws or assembles the direct coefficients.
    pub fn model(&self) -> Result<Model, CliError> {
        if let Some(laws) = &self.laws {
            let (eq, c) = laws.linearize()?;
            return Ok(Model { laws: Some((*laws, eq)), c });
        }
        let d = self.direct.as_ref().expect("validated");
        let n1p = d.nu1_plus.unwrap_or(d.nu_plus / 2.0);
        let n1m = d.nu1_minus.unwrap_or(d.nu_minus / 2.0);
        let c = ModelCoefficients::from_direct(d.beta, n1p, d.nu_plus - n1p, n1m, d.nu_minus - n1m)?;
        Ok(Model { laws: None, c })
    }
}
