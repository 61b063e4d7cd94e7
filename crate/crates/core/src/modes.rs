//! Growing-mode initial data on the frequency shell `η ≤ |ξ| ≤ 4η`.

use std::collections::HashMap;

use nalgebra::Vector4;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::closure::ModelCoefficients;
use crate::error::{Error, Result};
use crate::evolve::{SpectralState, State};
use crate::fields::{gradient_part, inverse_complex, BoxGrid, Spectrum};
use crate::spectral::{growing_eigenvector, lambda1, symbol_matrix};

/// Minimum number of lattice shells across `[η, 4η]`.
pub const MIN_SHELLS: usize = 6;

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, `C^∞` in between.
fn smooth_step(t: f64) -> f64 {
    let a = bump(t);
    let b = bump(1.0 - t);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Radial cutoff: exactly 1 on `[3η/2, 3η]`, exactly 0 outside `(η, 4η)`.
pub fn cutoff(r: f64, eta: f64) -> f64 {
    smooth_step((r - eta) / (0.5 * eta)) * smooth_step((4.0 * eta - r) / eta)
}

/// The cutoff as a value type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    pub eta: f64,
}

impl CutoffProfile {
    pub fn eval(&self, r: f64) -> f64 {
        cutoff(r, self.eta)
    }
}

/// Spectral amplitudes of the growing mode. All four are real and even in
/// `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowingMode {
    pub grid: BoxGrid,
    pub eta: f64,
    pub nhat_plus: Spectrum,
    pub phihat_plus: Spectrum,
    pub nhat_minus: Spectrum,
    pub phihat_minus: Spectrum,
}

/// Checks that `[η, 4η]` spans at least [`MIN_SHELLS`] lattice shells and
/// lies inside the dealiased region.
pub fn check_shell_resolution(eta: f64, grid: &BoxGrid) -> Result<()> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidInput(format!("eta must be positive and finite, got {eta}")));
    }
    let dk = grid.dk();
    // Tolerate rounding when the box is sized exactly to the shell.
    let shells = (3.0 * eta / dk * (1.0 + 1e-12)).floor() as usize;
    if shells < MIN_SHELLS {
        return Err(Error::GridTooCoarse(format!(
            "[eta, 4 eta] = [{eta}, {}] spans {shells} lattice shells of width {dk}; need {MIN_SHELLS} (box >= {})",
            4.0 * eta,
            4.0 * std::f64::consts::PI * MIN_SHELLS as f64 / (6.0 * eta)
        )));
    }
    let top = 4.0 * eta / dk;
    if top > grid.dealias_cutoff() as f64 {
        return Err(Error::GridTooCoarse(format!(
            "outer shell radius {top} lattice units exceeds the dealiasing cutoff {}",
            grid.dealias_cutoff()
        )));
    }
    Ok(())
}

pub fn build_mode(eta: f64, c: &ModelCoefficients, grid: &BoxGrid) -> Result<GrowingMode> {
    if !c.is_unstable() {
        return Err(Error::StableParameters(c.beta1 * c.beta4 - c.beta2 * c.beta3));
    }
    check_shell_resolution(eta, grid)?;
    let dk = grid.dk();
    // λ₁ per occupied shell |m|².
    let mut shells: Vec<i64> = (0..grid.len())
        .filter_map(|i| {
            let r = grid.wave(i).r;
            (r > eta && r < 4.0 * eta).then(|| grid.shell_index(i))
        })
        .collect();
    shells.sort_unstable();
    shells.dedup();
    let table: HashMap<i64, Vector4<f64>> = shells
        .par_iter()
        .map(|&m| {
            let r = (m as f64).sqrt() * dk;
            lambda1(r, c).map(|l| (m, growing_eigenvector(r, l, c) * cutoff(r, eta)))
        })
        .collect::<Result<_>>()?;
    let zero = Complex64::new(0.0, 0.0);
    let mut out: [Spectrum; 4] = std::array::from_fn(|_| vec![zero; grid.len()]);
    for i in 0..grid.len() {
        if let Some(v) = table.get(&grid.shell_index(i)) {
            let r = grid.wave(i).r;
            if r > eta && r < 4.0 * eta {
                for a in 0..4 {
                    out[a][i] = Complex64::new(v[a], 0.0);
                }
            }
        }
    }
    let [nhat_plus, phihat_plus, nhat_minus, phihat_minus] = out;
    Ok(GrowingMode {
        grid: *grid,
        eta,
        nhat_plus,
        phihat_plus,
        nhat_minus,
        phihat_minus,
    })
}

impl GrowingMode {
    /// The four amplitudes at lattice mode `i`.
    pub fn amplitudes(&self, i: usize) -> [Complex64; 4] {
        [self.nhat_plus[i], self.phihat_plus[i], self.nhat_minus[i], self.phihat_minus[i]]
    }

    /// Largest residual of the time-independent modal system over all
    /// modes, evaluated with `λ₁(|ξ|)`.
    pub fn residual(&self, c: &ModelCoefficients) -> Result<f64> {
        let mut worst = 0.0f64;
        for i in 0..self.grid.len() {
            let a = self.amplitudes(i);
            if a.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                continue;
            }
            let r = self.grid.wave(i).r;
            let l = lambda1(r, c)?;
            let v = Vector4::new(a[0].re, a[1].re, a[2].re, a[3].re);
            let res = symbol_matrix(r, c) * v - v * l;
            worst = worst.max(res.amax());
        }
        Ok(worst)
    }

    /// Scales all amplitudes by `s` (still a modal solution by linearity).
    pub fn scaled(&self, s: f64) -> Self {
        let f = |v: &Spectrum| v.iter().map(|z| z * s).collect();
        Self {
            grid: self.grid,
            eta: self.eta,
            nhat_plus: f(&self.nhat_plus),
            phihat_plus: f(&self.phihat_plus),
            nhat_minus: f(&self.nhat_minus),
            phihat_minus: f(&self.phihat_minus),
        }
    }
}

/// Spectral state with `n̂± = n̂₀±` and `û± = −(iξ/|ξ|)φ̂₀±` (pure gradients).
pub fn mode_to_spectral(m: &GrowingMode) -> SpectralState {
    let g = &m.grid;
    let [up0, up1, up2] = gradient_part(g, &m.phihat_plus);
    let [um0, um1, um2] = gradient_part(g, &m.phihat_minus);
    SpectralState {
        grid: *g,
        t: 0.0,
        comps: [m.nhat_plus.clone(), up0, up1, up2, m.nhat_minus.clone(), um0, um1, um2],
    }
}

pub fn mode_to_state(m: &GrowingMode) -> State {
    State::from_spectral(&mode_to_spectral(m))
}

/// Largest imaginary part of the synthesised mode fields (zero up to
/// rounding for conjugate-symmetric data).
pub fn imaginary_residue(m: &GrowingMode) -> f64 {
    mode_to_spectral(m)
        .comps
        .iter()
        .flat_map(|s| inverse_complex(&m.grid, s))
        .map(|z| z.im.abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_values() {
        let eta = 0.7;
        assert_eq!(cutoff(2.0 * eta, eta), 1.0);
        assert_eq!(cutoff(1.5 * eta, eta), 1.0);
        assert_eq!(cutoff(3.0 * eta, eta), 1.0);
        assert_eq!(cutoff(0.5 * eta, eta), 0.0);
        assert_eq!(cutoff(eta, eta), 0.0);
        assert_eq!(cutoff(4.0 * eta, eta), 0.0);
        assert_eq!(cutoff(5.0 * eta, eta), 0.0);
        let v = cutoff(1.25 * eta, eta);
        assert!(v > 0.0 && v < 1.0);
        let w = cutoff(3.5 * eta, eta);
        assert!(w > 0.0 && w < 1.0);
    }

    #[test]
    fn cutoff_is_smooth() {
        // Second differences stay bounded as the step shrinks.
        let eta = 1.0;
        for &h in &[1e-2, 1e-3] {
            let mut worst = 0.0f64;
            let mut r = 0.9;
            while r < 4.1 {
                let d2 = (cutoff(r + h, eta) - 2.0 * cutoff(r, eta) + cutoff(r - h, eta)) / (h * h);
                worst = worst.max(d2.abs());
                r += 0.01;
            }
            assert!(worst < 100.0, "h={h}: {worst}");
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let c = ModelCoefficients::from_direct([1.0, 2.0, 1.0, 1.0], 0.5, 0.5, 0.5, 0.5).unwrap();
        let g = BoxGrid::new(16, 4.0).unwrap();
        assert!(matches!(build_mode(1.0, &c, &g), Err(Error::GridTooCoarse(_))));
        let stable = ModelCoefficients::from_direct([1.0, 0.5, 1.0, 1.0], 0.5, 0.5, 0.5, 0.5).unwrap();
        assert!(matches!(build_mode(1.0, &stable, &g), Err(Error::StableParameters(_))));
    }
}
