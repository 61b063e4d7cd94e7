//! Exact linear evolution: per lattice mode, the compressible 4-vector
//! `(n̂⁺, φ̂⁺, n̂⁻, φ̂⁻)` is advanced by `e^{t𝒜₁(r)}` and the
//! divergence-free parts by heat factors.

use std::collections::HashMap;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{SpectralState, State};
use crate::closure::ModelCoefficients;
use crate::error::Result;
use crate::fields::BoxGrid;
use crate::spectral::propagator;

#[derive(Debug, Clone, Copy)]
struct ModeStep {
    e: Matrix4<f64>,
    heat_plus: f64,
    heat_minus: f64,
}

/// `e^{Δt·L}` on one grid, tabulated per distinct `|k_odd|²`.
#[derive(Debug, Clone)]
pub struct LinearPropagator {
    grid: BoxGrid,
    dt: f64,
    table: HashMap<i64, ModeStep>,
}

impl LinearPropagator {
    pub fn new(grid: BoxGrid, c: &ModelCoefficients, dt: f64) -> Self {
        let mut shells: Vec<i64> = (0..grid.len()).map(|i| grid.shell_index_odd(i)).collect();
        shells.sort_unstable();
        shells.dedup();
        let dk = grid.dk();
        let table = shells
            .into_par_iter()
            .map(|m| {
                let r = (m as f64).sqrt() * dk;
                let step = ModeStep {
                    e: propagator(r, c, dt),
                    heat_plus: (-c.nu1_plus * r * r * dt).exp(),
                    heat_minus: (-c.nu1_minus * r * r * dt).exp(),
                };
                (m, step)
            })
            .collect();
        Self { grid, dt, table }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> BoxGrid {
        self.grid
    }

    /// Applies the step to every mode; the time advances by `dt`.
    pub fn apply(&self, s: &SpectralState) -> Result<SpectralState> {
        self.grid.check_same(&s.grid)?;
        let g = self.grid;
        let rows: Vec<[Complex64; 8]> = (0..g.len())
            .into_par_iter()
            .map(|i| {
                let v: [Complex64; 8] = std::array::from_fn(|a| s.comps[a][i]);
                let w = g.wave(i);
                if w.r_odd == 0.0 {
                    return v;
                }
                let step = &self.table[&g.shell_index_odd(i)];
                let kh = w.k_odd.map(|k| k / w.r_odd);
                let (np, up) = (v[0], [v[1], v[2], v[3]]);
                let (nm, um) = (v[4], [v[5], v[6], v[7]]);
                let split = |u: [Complex64; 3]| {
                    let d = u[0] * kh[0] + u[1] * kh[1] + u[2] * kh[2];
                    // φ = i k̂·u, psi = u + i k̂ φ.
                    let phi = Complex64::new(-d.im, d.re);
                    let psi: [Complex64; 3] = std::array::from_fn(|a| u[a] + Complex64::new(-phi.im, phi.re) * kh[a]);
                    (phi, psi)
                };
                let (pp, psip) = split(up);
                let (pm, psim) = split(um);
                let x = [np, pp, nm, pm];
                let y: [Complex64; 4] = std::array::from_fn(|r| (0..4).map(|c| x[c] * step.e[(r, c)]).sum());
                let grad = |phi: Complex64, a: usize| Complex64::new(phi.im, -phi.re) * kh[a];
                let mut out = [Complex64::new(0.0, 0.0); 8];
                out[0] = y[0];
                out[4] = y[2];
                for a in 0..3 {
                    out[1 + a] = grad(y[1], a) + psip[a] * step.heat_plus;
                    out[5 + a] = grad(y[3], a) + psim[a] * step.heat_minus;
                }
                out
            })
            .collect();
        let mut out = SpectralState::zeros(g, s.t + self.dt);
        for (a, comp) in out.comps.iter_mut().enumerate() {
            comp.par_iter_mut().zip(rows.par_iter()).for_each(|(z, row)| *z = row[a]);
        }
        Ok(out)
    }
}

/// Exact linear evolution over `t` in one step.
pub fn evolve_linear_spectral(s: &SpectralState, c: &ModelCoefficients, t: f64) -> Result<SpectralState> {
    if t == 0.0 {
        return Ok(s.clone());
    }
    LinearPropagator::new(s.grid, c, t).apply(s)
}

pub fn evolve_linear(s: &State, c: &ModelCoefficients, t: f64) -> Result<State> {
    let spec = s.to_spectral()?;
    Ok(State::from_spectral(&evolve_linear_spectral(&spec, c, t)?))
}
