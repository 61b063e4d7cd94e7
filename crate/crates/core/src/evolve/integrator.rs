//! Integrating-factor fourth-order Runge–Kutta (Lawson) time stepping and
//! the online Duhamel check.

use serde::Serialize;

use super::{LinearPropagator, Nonlinearity, SpectralState};
use crate::closure::ModelCoefficients;
use crate::error::{Error, Result};
use crate::fields::inverse_many;
use crate::spectral::eigenvalues;

/// Largest admissible step: `1 / max_i |λ_i(r_max)|` with `r_max` the
/// largest retained frequency.
pub fn step_limit(grid: &crate::fields::BoxGrid, c: &ModelCoefficients) -> f64 {
    let r = grid.max_retained_r();
    let m = eigenvalues(r, c).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if m > 0.0 {
        1.0 / m
    } else {
        f64::INFINITY
    }
}

/// One-step map `U ↦ U(t + h)`.
pub struct Integrator {
    full: LinearPropagator,
    half: LinearPropagator,
    dt: f64,
}

impl Integrator {
    pub fn new(grid: crate::fields::BoxGrid, c: &ModelCoefficients, dt: f64) -> Result<Self> {
        let limit = step_limit(&grid, c);
        if !(dt > 0.0) || dt > limit {
            return Err(Error::StepTooLarge { dt, limit });
        }
        Ok(Self {
            full: LinearPropagator::new(grid, c, dt),
            half: LinearPropagator::new(grid, c, 0.5 * dt),
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Lawson RK4 step given the tendency `k1 = 𝓕(u)` at the start.
    pub fn step_with(&self, u: &SpectralState, k1: &SpectralState, nl: &dyn Nonlinearity) -> Result<SpectralState> {
        let h = self.dt;
        let eh = |x: &SpectralState| self.half.apply(x);
        let mut a = u.clone();
        a.axpy(0.5 * h, k1);
        let a = eh(&a)?;
        let k2 = nl.tendency(&a)?;
        let mut b = eh(u)?;
        let eu_half = b.clone();
        b.axpy(0.5 * h, &k2);
        let k3 = nl.tendency(&b)?;
        let mut cst = self.full.apply(u)?;
        cst.axpy(h, &eh(&k3)?);
        let k4 = nl.tendency(&cst)?;
        // u⁺ = E_h u + h/6 (E_h k1 + 2 E_{h/2}(k2 + k3) + k4)
        let mut mid = k2;
        mid.axpy(1.0, &k3);
        let mut acc = self.full.apply(k1)?.scaled(h / 6.0);
        acc.axpy(h / 3.0, &eh(&mid)?);
        acc.axpy(h / 6.0, &k4);
        let mut next = self.half.apply(&eu_half)?;
        next.axpy(1.0, &acc);
        next.t = u.t + h;
        Ok(next)
    }

    pub fn step(&self, u: &SpectralState, nl: &dyn Nonlinearity) -> Result<SpectralState> {
        let k1 = nl.tendency(u)?;
        self.step_with(u, &k1, nl)
    }
}

/// One row of the time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub l2_total: f64,
    pub h4_total: f64,
    /// `L²` norms of `n⁺`, `u⁺`, `n⁻`, `u⁻`.
    pub l2: [f64; 4],
    /// Smallest un-scaled mass `min(R⁺, R⁻)` on the grid.
    pub guard_min_r: f64,
}

pub const SERIES_HEADER: &str = "t,l2_total,h4_total,l2_n_plus,l2_u_plus,l2_n_minus,l2_u_minus,guard_min_R";

impl Sample {
    pub fn of(s: &SpectralState, c: &ModelCoefficients) -> Self {
        let l2 = s.component_norms(0);
        let g = s.grid;
        let phys = inverse_many(&g, &[&s.comps[0], &s.comps[4]]);
        let min_p = phys[0].iter().copied().fold(f64::INFINITY, f64::min) / c.alpha1;
        let min_m = phys[1].iter().copied().fold(f64::INFINITY, f64::min) / c.alpha4;
        Self {
            t: s.t,
            l2_total: l2.iter().sum(),
            h4_total: s.total_norm(4),
            l2,
            guard_min_r: 1.0 + min_p.min(min_m),
        }
    }

    pub fn csv_row(&self) -> String {
        crate::fmt::row(&[
            self.t,
            self.l2_total,
            self.h4_total,
            self.l2[0],
            self.l2[1],
            self.l2[2],
            self.l2[3],
            self.guard_min_r,
        ])
    }
}

pub fn series_csv(samples: &[Sample]) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for s in samples {
        out.push_str(&s.csv_row());
        out.push('\n');
    }
    out
}

/// Trapezoidal Duhamel quadrature tracked along a run with sample spacing
/// `steps·dt`: `Q_{k+1} = E Q_k + (h/2)(E 𝓕_k + 𝓕_{k+1})` approximates
/// `∫₀ᵗ e^{(t−τ)L}𝓕(τ)dτ`, and the residual is `‖U − e^{tL}U₀ − Q‖`.
pub struct DuhamelTracker {
    steps: usize,
    h: f64,
    prop: LinearPropagator,
    q: Option<SpectralState>,
    lin: Option<SpectralState>,
    prev_f: Option<SpectralState>,
    rows: Vec<DuhamelRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DuhamelRow {
    pub t: f64,
    /// `L²` norm of `U − e^{tL}U₀ − Q`.
    pub residual: f64,
    /// `L²` norm of `U_d = U − e^{tL}U₀`.
    pub ud_norm: f64,
}

/// Residual series at one sample spacing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuhamelSeries {
    pub steps: usize,
    pub interval: f64,
    pub rows: Vec<DuhamelRow>,
}

impl DuhamelTracker {
    pub fn new(grid: crate::fields::BoxGrid, c: &ModelCoefficients, dt: f64, steps: usize) -> Self {
        let h = dt * steps as f64;
        Self {
            steps,
            h,
            prop: LinearPropagator::new(grid, c, h),
            q: None,
            lin: None,
            prev_f: None,
            rows: Vec::new(),
        }
    }

    /// Feeds the state and tendency at step `step`; ignored unless `step` is
    /// a multiple of the tracker's spacing.
    pub fn observe(&mut self, step: usize, u: &SpectralState, f: &SpectralState) -> Result<()> {
        if !step.is_multiple_of(self.steps) {
            return Ok(());
        }
        match (self.q.take(), self.lin.take(), self.prev_f.take()) {
            (Some(q), Some(lin), Some(pf)) => {
                let mut q = self.prop.apply(&q)?;
                q.axpy(0.5 * self.h, &self.prop.apply(&pf)?);
                q.axpy(0.5 * self.h, f);
                let lin = self.prop.apply(&lin)?;
                let ud = u.sub(&lin);
                let res = ud.sub(&q);
                self.rows.push(DuhamelRow {
                    t: u.t,
                    residual: res.total_norm(0),
                    ud_norm: ud.total_norm(0),
                });
                self.q = Some(q);
                self.lin = Some(lin);
            }
            _ => {
                self.q = Some(SpectralState::zeros(u.grid, u.t));
                self.lin = Some(u.clone());
                self.rows.push(DuhamelRow {
                    t: u.t,
                    residual: 0.0,
                    ud_norm: 0.0,
                });
            }
        }
        self.prev_f = Some(f.clone());
        Ok(())
    }

    pub fn finish(self) -> DuhamelSeries {
        DuhamelSeries {
            steps: self.steps,
            interval: self.h,
            rows: self.rows,
        }
    }
}

/// Observed order of the trapezoid residual between spacings `h` and `2h`
/// at the latest time both series share.
pub fn duhamel_order(fine: &DuhamelSeries, coarse: &DuhamelSeries) -> Option<f64> {
    let last = coarse.rows.iter().rev().find(|r| r.t > 0.0)?;
    let f = fine.rows.iter().find(|r| (r.t - last.t).abs() <= 1e-9 * last.t.max(1.0))?;
    if f.residual > 0.0 && last.residual > 0.0 {
        Some((last.residual / f.residual).log2())
    } else {
        None
    }
}

/// Run controls.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub t_end: f64,
    /// Requested step; the step actually used is `t_end / ceil(t_end/dt)`.
    pub dt: f64,
    /// Steps between series samples.
    pub sample_every: usize,
    /// Samples between stored snapshots; `None` stores none.
    pub snapshot_every: Option<usize>,
    /// Duhamel sample spacings, in steps.
    pub duhamel_steps: Vec<usize>,
}

impl RunOptions {
    pub fn new(t_end: f64, dt: f64) -> Self {
        Self {
            t_end,
            dt,
            sample_every: 1,
            snapshot_every: None,
            duhamel_steps: Vec::new(),
        }
    }

    /// Number of steps and the uniform step that lands exactly on `t_end`.
    pub fn schedule(&self) -> Result<(usize, f64)> {
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidInput(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidInput(format!("dt must be positive, got {}", self.dt)));
        }
        if self.sample_every == 0 || self.duhamel_steps.contains(&0) || self.snapshot_every == Some(0) {
            return Err(Error::InvalidInput("strides must be positive".into()));
        }
        if self.t_end == 0.0 {
            return Ok((0, self.dt));
        }
        let steps = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        Ok((steps, self.t_end / steps as f64))
    }
}

/// Result of a nonlinear run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub snapshots: Vec<SpectralState>,
    pub final_state: SpectralState,
    pub dt: f64,
    /// Why the run ended before `t_end`, if it did.
    pub stopped: Option<String>,
    pub duhamel: Vec<DuhamelSeries>,
}

/// Integrates from `s0` to `opts.t_end`. `stop` sees every sample and ends
/// the run early by returning `true`. A tripped positivity guard ends the
/// run with a labeled, truncated trajectory instead of an error.
pub fn evolve_nonlinear(
    s0: &SpectralState,
    nl: &dyn Nonlinearity,
    c: &ModelCoefficients,
    opts: &RunOptions,
    mut stop: impl FnMut(&Sample) -> bool,
) -> Result<Trajectory> {
    let (steps, dt) = opts.schedule()?;
    let grid = s0.grid;
    let integ = if steps > 0 { Some(Integrator::new(grid, c, dt)?) } else { None };
    let mut trackers: Vec<DuhamelTracker> = opts
        .duhamel_steps
        .iter()
        .map(|&m| DuhamelTracker::new(grid, c, dt, m))
        .collect();
    let mut u = s0.clone();
    let t0 = s0.t;
    let first = Sample::of(&u, c);
    let mut samples = vec![first];
    let mut snapshots = Vec::new();
    if opts.snapshot_every.is_some() {
        snapshots.push(u.clone());
    }
    let mut stopped = None;
    let guard = |e: Error| -> Result<String> {
        match e {
            Error::NonPositiveMass { .. } => Ok(format!("positivity guard: {e}")),
            other => Err(other),
        }
    };
    let mut done = stop(&first);
    let mut step = 0usize;
    while !done && step < steps {
        let k1 = match nl.tendency(&u) {
            Ok(k) => k,
            Err(e) => {
                stopped = Some(guard(e)?);
                break;
            }
        };
        for t in trackers.iter_mut() {
            t.observe(step, &u, &k1)?;
        }
        let next = match integ.as_ref().expect("steps > 0").step_with(&u, &k1, nl) {
            Ok(n) => n,
            Err(e) => {
                stopped = Some(guard(e)?);
                break;
            }
        };
        step += 1;
        u = next;
        u.t = t0 + step as f64 * dt;
        if step.is_multiple_of(opts.sample_every) {
            let s = Sample::of(&u, c);
            samples.push(s);
            if let Some(every) = opts.snapshot_every {
                if (samples.len() - 1) % every == 0 {
                    snapshots.push(u.clone());
                }
            }
            done = stop(&s);
        }
    }
    if stopped.is_none() && !trackers.is_empty() {
        match nl.tendency(&u) {
            Ok(kf) => {
                for t in trackers.iter_mut() {
                    t.observe(step, &u, &kf)?;
                }
            }
            Err(e) => stopped = Some(guard(e)?),
        }
    }
    if stopped.is_none() && step < steps {
        stopped = Some(format!("stop condition met at t = {}", u.t));
    }
    Ok(Trajectory {
        samples,
        snapshots,
        final_state: u,
        dt,
        stopped,
        duhamel: trackers.into_iter().map(DuhamelTracker::finish).collect(),
    })
}
