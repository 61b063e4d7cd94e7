//! The escape-time experiment: start from `ε` times the `H⁴`-normalised
//! growing mode and measure when the solution reaches a fixed size.

use std::f64::consts::{E, PI};

use serde::Serialize;

use super::integrator::{duhamel_order, evolve_nonlinear, step_limit, DuhamelSeries, RunOptions, Sample};
use super::{FullNonlinearity, LinearPropagator};
use crate::closure::{Laws, ModelCoefficients};
use crate::error::{Error, Result};
use crate::fields::BoxGrid;
use crate::modes::{build_mode, mode_to_spectral};
use crate::spectral::eta_threshold;

/// Amplitudes and rates of one escape run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeConfig {
    pub eps: f64,
    pub eps0: f64,
    pub theta: f64,
    /// `ϑ = 1/T^ε`.
    pub vartheta: f64,
    /// `T^ε = (1/θ)·ln(2ε₀/ε)`.
    pub t_pred: f64,
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    /// Duhamel sample spacings in steps; consecutive entries should double.
    pub duhamel_steps: Vec<usize>,
}

/// `T^ε = (1/θ)·ln(2ε₀/ε)`.
pub fn predicted_escape_time(theta: f64, eps: f64, eps0: f64) -> f64 {
    (2.0 * eps0 / eps).ln() / theta
}

impl EscapeConfig {
    /// Defaults: `t_end = 1.3·T^ε`, step and spacings chosen by the caller
    /// (`dt = 0` means "use the stability limit").
    pub fn new(eps: f64, eps0: f64, theta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < eps0 && eps0.is_finite()) {
            return Err(Error::InvalidInput(format!("need 0 < eps < eps0, got eps = {eps}, eps0 = {eps0}")));
        }
        if !(theta > 0.0) {
            return Err(Error::StableParameters(theta));
        }
        let t_pred = predicted_escape_time(theta, eps, eps0);
        Ok(Self {
            eps,
            eps0,
            theta,
            vartheta: 1.0 / t_pred,
            t_pred,
            t_end: 1.3 * t_pred,
            dt: 0.0,
            sample_every: 1,
            duhamel_steps: vec![1, 2, 4],
        })
    }
}

/// Shell parameter and grid of the escape run: `η` from the growth-band
/// threshold for `ϑ`, box length `4π/η` so the shell spans six lattice
/// shells.
pub fn escape_setup(cfg: &EscapeConfig, c: &ModelCoefficients, n: usize) -> Result<(BoxGrid, f64)> {
    let eta = eta_threshold(c, cfg.vartheta)?;
    let grid = BoxGrid::new(n, 4.0 * PI / eta)?;
    Ok((grid, eta))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeResult {
    pub config: EscapeConfig,
    pub grid: BoxGrid,
    pub eta: f64,
    pub dt: f64,
    /// `L²` norm of the normalised mode.
    pub m0: f64,
    /// `min(ε₀, ε₀m₀/e)`.
    pub delta0: f64,
    pub delta0_eps0: f64,
    pub delta0_scaled: f64,
    /// First time the `L²` norm reaches `δ₀`.
    pub t_escape: Option<f64>,
    pub t_escape_h4: Option<f64>,
    /// First times the `L²` and `H⁴` norms reach `ε₀`.
    pub t_escape_l2_eps0: Option<f64>,
    pub t_escape_h4_eps0: Option<f64>,
    /// `t_escape / T^ε`.
    pub escape_ratio: Option<f64>,
    pub growth_fit: f64,
    /// Norm level bounding the fit window, `ε₀^{2/3}·m₀`.
    pub fit_ceiling: f64,
    /// Largest `|L²_nonlinear/L²_linear − 1|` inside the fit window.
    pub tracking_max_rel: f64,
    pub duhamel: Vec<DuhamelSeries>,
    /// Observed orders between consecutive spacings.
    pub duhamel_orders: Vec<f64>,
    pub stopped: Option<String>,
    /// `NoEscape` when the run ended before the `L²` threshold.
    pub error: Option<String>,
    pub series: Vec<Sample>,
}

/// First time a sampled quantity reaches `level`, interpolated linearly in
/// `log` between the bracketing samples.
pub fn first_crossing(series: &[(f64, f64)], level: f64) -> Option<f64> {
    if let Some(&(t, y)) = series.first() {
        if y >= level {
            return Some(t);
        }
    }
    series.windows(2).find_map(|w| {
        let ((ta, ya), (tb, yb)) = (w[0], w[1]);
        (ya < level && yb >= level).then(|| {
            let s = (level.ln() - ya.ln()) / (yb.ln() - ya.ln());
            ta + s * (tb - ta)
        })
    })
}

/// Least-squares slope of `ln y` against `t`.
pub fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (st, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(t, y)| (a + t, b + y.ln()));
    let (mt, my) = (st / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), &(t, y)| {
        let dt = t - mt;
        (a + dt * (y.ln() - my), b + dt * dt)
    });
    num / den
}

pub fn escape_experiment(
    cfg: &EscapeConfig,
    laws: &Laws,
    c: &ModelCoefficients,
    grid: &BoxGrid,
    eta: f64,
) -> Result<EscapeResult> {
    let nl = FullNonlinearity::new(laws)?;
    let mode = build_mode(eta, c, grid)?;
    let unit = mode_to_spectral(&mode);
    let unit = unit.scaled(1.0 / unit.total_norm(4));
    let m0 = unit.total_norm(0);
    let s0 = unit.scaled(cfg.eps);

    let dt = if cfg.dt > 0.0 { cfg.dt } else { 0.999 * step_limit(grid, c) };
    let mut opts = RunOptions::new(cfg.t_end, dt);
    opts.sample_every = cfg.sample_every;
    opts.duhamel_steps = cfg.duhamel_steps.clone();
    let eps0 = cfg.eps0;
    let traj = evolve_nonlinear(&s0, &nl, c, &opts, |s| s.l2_total >= eps0)?;

    let l2: Vec<(f64, f64)> = traj.samples.iter().map(|s| (s.t, s.l2_total)).collect();
    let h4: Vec<(f64, f64)> = traj.samples.iter().map(|s| (s.t, s.h4_total)).collect();
    let delta0_scaled = eps0 * m0 / E;
    let delta0 = eps0.min(delta0_scaled);
    let t_escape = first_crossing(&l2, delta0);

    // Fit window and linear reference.
    let fit_ceiling = eps0.powf(2.0 / 3.0) * m0;
    let window: Vec<(f64, f64)> = l2.iter().copied().take_while(|&(_, y)| y < fit_ceiling).collect();
    let growth_fit = if window.len() >= 2 { log_slope(&window) } else { f64::NAN };
    let mut tracking_max_rel = 0.0f64;
    if window.len() >= 2 {
        let spacing = traj.dt * cfg.sample_every as f64;
        let prop = LinearPropagator::new(*grid, c, spacing);
        let mut lin = s0.clone();
        for (k, &(_, y)) in window.iter().enumerate() {
            if k > 0 {
                lin = prop.apply(&lin)?;
            }
            tracking_max_rel = tracking_max_rel.max((y / lin.total_norm(0) - 1.0).abs());
        }
    }

    let duhamel_orders = traj
        .duhamel
        .windows(2)
        .filter_map(|w| duhamel_order(&w[0], &w[1]))
        .collect();
    let error = t_escape.is_none().then(|| {
        Error::NoEscape {
            t_end: traj.final_state.t,
            threshold: delta0,
        }
        .to_string()
    });
    Ok(EscapeResult {
        config: cfg.clone(),
        grid: *grid,
        eta,
        dt: traj.dt,
        m0,
        delta0,
        delta0_eps0: eps0,
        delta0_scaled,
        t_escape,
        t_escape_h4: first_crossing(&h4, delta0),
        t_escape_l2_eps0: first_crossing(&l2, eps0),
        t_escape_h4_eps0: first_crossing(&h4, eps0),
        escape_ratio: t_escape.map(|t| t / cfg.t_pred),
        growth_fit,
        fit_ceiling,
        tracking_max_rel,
        duhamel: traj.duhamel,
        duhamel_orders,
        stopped: traj.stopped,
        error,
        series: traj.samples,
    })
}
