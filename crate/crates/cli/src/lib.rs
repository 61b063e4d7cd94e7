//! Batch front end: one configuration file, one command, artifacts in the
//! configured output directory.

// Guards like `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod verify;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::Subcommand;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;
use twofluid::evolve::{
    duhamel_order, escape_experiment, escape_setup, evolve_nonlinear, series_csv, step_limit, EscapeConfig,
    FullNonlinearity, LinearPropagator, RunOptions, Sample, SpectralState, State,
};
use twofluid::modes::{build_mode, mode_to_spectral};
use twofluid::spectral::{dispersion_csv, eta_threshold};
use twofluid::BoxGrid;

use config::{InitialData, Model, RunConfig};

/// Environment variable that caps the worker thread count.
pub const THREADS_ENV: &str = "TWOFLUID_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("ConfigError: {0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] twofluid::Error),
    /// Carries the rendered report so it can still be printed.
    #[error("VerifyFailed: {failures} check(s) failed")]
    VerifyFailed { failures: usize, report: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Library(_) => 3,
            CliError::VerifyFailed { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Linearisation coefficients and growth rate as JSON.
    Coeffs,
    /// Eigenvalues on a geometric frequency grid as CSV.
    Dispersion {
        #[arg(long, default_value_t = 1e-3)]
        rmin: f64,
        #[arg(long, default_value_t = 1e3)]
        rmax: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Growth rate and the frequency beyond which modes grow at `θ − ϑ`.
    Theta {
        #[arg(long)]
        vartheta: Option<f64>,
    },
    /// Field file of the growing-mode state.
    Mode,
    /// Exact linear evolution: series CSV and snapshots.
    EvolveLinear,
    /// Nonlinear evolution: series CSV, snapshots and a JSON summary.
    EvolveNonlinear,
    /// Escape-time experiment.
    Escape,
    /// Runs the invariant suite; fails if any check fails.
    Verify,
}

/// What a command printed and wrote.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub stdout: String,
    pub artifacts: Vec<PathBuf>,
}

fn write_artifact(out: &mut Outcome, dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| twofluid::Error::Io(format!("{}: {e}", path.display())))?;
    out.artifacts.push(path);
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serialises") + "\n"
}

fn vartheta(cfg: &RunConfig, m: &Model) -> f64 {
    cfg.experiment.vartheta.unwrap_or(m.c.theta / 10.0)
}

/// Shell parameter and grid of the growing-mode commands.
fn mode_grid(cfg: &RunConfig, m: &Model) -> Result<(BoxGrid, Option<f64>), CliError> {
    let eta = match cfg.experiment.eta {
        Some(e) => Some(e),
        None if m.c.is_unstable() => Some(eta_threshold(&m.c, vartheta(cfg, m))?),
        None => None,
    };
    let box_len = match (cfg.grid.box_len, eta) {
        (Some(l), _) => l,
        (None, Some(e)) => 4.0 * PI / e,
        (None, None) => 2.0 * PI,
    };
    Ok((BoxGrid::new(cfg.grid.n, box_len)?, eta))
}

/// Initial data scaled to size `eps`.
fn initial_state(cfg: &RunConfig, m: &Model) -> Result<SpectralState, CliError> {
    let (grid, eta) = mode_grid(cfg, m)?;
    let eps = cfg.experiment.eps;
    match (cfg.experiment.init, eta) {
        (InitialData::Mode, Some(eta)) => {
            let s = mode_to_spectral(&build_mode(eta, &m.c, &grid)?);
            Ok(s.scaled(eps / s.total_norm(4)))
        }
        (InitialData::Mode, None) => Err(CliError::Config(
            "a growing mode needs an unstable configuration; set experiment.init = \"random\"".into(),
        )),
        (InitialData::Random, _) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.experiment.seed);
            Ok(verify::random_state(grid, &mut rng)?.scaled(eps))
        }
    }
}

fn default_t_end(cfg: &RunConfig, m: &Model) -> f64 {
    cfg.experiment.t_end.unwrap_or(if m.c.theta > 0.0 { 10.0 / m.c.theta } else { 10.0 })
}

fn write_snapshots(out: &mut Outcome, dir: &Path, snaps: &[SpectralState]) -> Result<(), CliError> {
    for (k, s) in snaps.iter().enumerate() {
        let path = dir.join(format!("snapshot_{k:05}.field"));
        State::from_spectral(s).write(&path)?;
        out.artifacts.push(path);
    }
    Ok(())
}

#[derive(Serialize)]
struct ThetaReport {
    theta: f64,
    vartheta: f64,
    eta1: Option<f64>,
}

#[derive(Serialize)]
struct NonlinearSummary {
    dt: f64,
    samples: usize,
    final_t: f64,
    stopped: Option<String>,
    duhamel_steps: Vec<usize>,
    duhamel_orders: Vec<Option<f64>>,
    final_residuals: Vec<Option<f64>>,
}

/// Runs one command. Artifacts go to `cfg.output`, created if missing.
pub fn run(cmd: &Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = cfg.model()?;
    let dir = cfg.output.as_path();
    std::fs::create_dir_all(dir).map_err(|e| twofluid::Error::Io(format!("{}: {e}", dir.display())))?;
    let mut out = Outcome::default();
    match cmd {
        Command::Coeffs => {
            let text = json(&m.c);
            write_artifact(&mut out, dir, "coeffs.json", &text)?;
            out.stdout = text;
        }
        Command::Dispersion { rmin, rmax, samples } => {
            let csv = dispersion_csv(&m.c, *rmin, *rmax, *samples)?;
            write_artifact(&mut out, dir, "dispersion.csv", &csv)?;
        }
        Command::Theta { vartheta: v } => {
            let v = v.or(cfg.experiment.vartheta).unwrap_or(m.c.theta / 10.0);
            let eta1 = if m.c.is_unstable() { Some(eta_threshold(&m.c, v)?) } else { None };
            let text = json(&ThetaReport {
                theta: m.c.theta,
                vartheta: v,
                eta1,
            });
            write_artifact(&mut out, dir, "theta.json", &text)?;
            out.stdout = text;
        }
        Command::Mode => {
            let (grid, eta) = mode_grid(cfg, &m)?;
            let eta = eta.ok_or(CliError::Library(twofluid::Error::StableParameters(m.c.beta1 * m.c.beta4 - m.c.beta2 * m.c.beta3)))?;
            let path = dir.join("mode.field");
            State::from_spectral(&mode_to_spectral(&build_mode(eta, &m.c, &grid)?)).write(&path)?;
            out.artifacts.push(path);
        }
        Command::EvolveLinear => {
            let s0 = initial_state(cfg, &m)?;
            let t_end = default_t_end(cfg, &m);
            let dt = cfg.experiment.dt.unwrap_or(t_end / 100.0);
            let stride = cfg.experiment.stride;
            let steps = (t_end / (dt * stride as f64) - 1e-9).ceil().max(0.0) as usize;
            let prop = LinearPropagator::new(s0.grid, &m.c, dt * stride as f64);
            let mut samples = vec![Sample::of(&s0, &m.c)];
            let mut snaps = Vec::new();
            let every = cfg.experiment.snapshot_every;
            if every.is_some() {
                snaps.push(s0.clone());
            }
            let mut s = s0;
            for k in 1..=steps {
                s = prop.apply(&s)?;
                samples.push(Sample::of(&s, &m.c));
                if matches!(every, Some(e) if k % e == 0) {
                    snaps.push(s.clone());
                }
            }
            write_artifact(&mut out, dir, "series.csv", &series_csv(&samples))?;
            write_snapshots(&mut out, dir, &snaps)?;
        }
        Command::EvolveNonlinear => {
            let (laws, _) = m
                .laws
                .ok_or_else(|| CliError::Config("evolve-nonlinear needs [laws], not [direct]".into()))?;
            let s0 = initial_state(cfg, &m)?;
            let t_end = default_t_end(cfg, &m);
            let dt = cfg.experiment.dt.unwrap_or(0.9 * step_limit(&s0.grid, &m.c));
            let mut opts = RunOptions::new(t_end, dt);
            opts.sample_every = cfg.experiment.stride;
            opts.snapshot_every = cfg.experiment.snapshot_every;
            opts.duhamel_steps = cfg.experiment.duhamel_steps.clone();
            let nl = FullNonlinearity::new(&laws)?;
            let traj = evolve_nonlinear(&s0, &nl, &m.c, &opts, |_| false)?;
            write_artifact(&mut out, dir, "series.csv", &series_csv(&traj.samples))?;
            write_snapshots(&mut out, dir, &traj.snapshots)?;
            let summary = NonlinearSummary {
                dt: traj.dt,
                samples: traj.samples.len(),
                final_t: traj.final_state.t,
                stopped: traj.stopped.clone(),
                duhamel_steps: opts.duhamel_steps.clone(),
                duhamel_orders: traj.duhamel.windows(2).map(|w| duhamel_order(&w[0], &w[1])).collect(),
                final_residuals: traj.duhamel.iter().map(|d| d.rows.last().map(|r| r.residual)).collect(),
            };
            let text = json(&summary);
            write_artifact(&mut out, dir, "summary.json", &text)?;
            out.stdout = text;
        }
        Command::Escape => {
            let (laws, _) = m.laws.ok_or_else(|| CliError::Config("escape needs [laws], not [direct]".into()))?;
            let e = &cfg.experiment;
            let mut ec = EscapeConfig::new(e.eps, e.eps0, m.c.theta)?;
            if let Some(t) = e.t_end {
                ec.t_end = t;
            }
            if let Some(dt) = e.dt {
                ec.dt = dt;
            }
            ec.sample_every = e.stride;
            if !e.duhamel_steps.is_empty() {
                ec.duhamel_steps = e.duhamel_steps.clone();
            }
            let (grid, eta) = escape_setup(&ec, &m.c, cfg.grid.n)?;
            let mut res = escape_experiment(&ec, &laws, &m.c, &grid, eta)?;
            write_artifact(&mut out, dir, "escape_series.csv", &series_csv(&res.series))?;
            res.series.clear();
            let text = json(&res);
            write_artifact(&mut out, dir, "escape.json", &text)?;
            out.stdout = text;
        }
        Command::Verify => {
            let report = verify::verify(&m, cfg.experiment.vartheta, verify::SuiteSize::default(), cfg.experiment.seed);
            let text = report.render();
            write_artifact(&mut out, dir, "verify.txt", &text)?;
            if !report.passed() {
                return Err(CliError::VerifyFailed {
                    failures: report.failures(),
                    report: text,
                });
            }
            out.stdout = text;
        }
    }
    Ok(out)
}
