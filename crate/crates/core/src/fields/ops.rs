//! Fourier multipliers, the Hodge split and Sobolev norms.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{BoxGrid, ScalarField, Spectrum, VectorField, Wave};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Multiplies each coefficient by `m(ξ)`. At `ξ = 0` the value `zero` is
/// used when given; otherwise `m(0)` must be finite.
pub fn apply_multiplier<F>(grid: &BoxGrid, spec: &mut [Complex64], m: F, zero: Option<Complex64>) -> Result<()>
where
    F: Fn(&Wave) -> Complex64 + Sync,
{
    if spec.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "spectrum of length {} on a grid of {} modes",
            spec.len(),
            grid.len()
        )));
    }
    let m0 = match zero {
        Some(z) => z,
        None => {
            let z = m(&grid.wave(0));
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::UndefinedAtZero);
            }
            z
        }
    };
    spec[0] *= m0;
    spec[1..].par_iter_mut().enumerate().for_each(|(i, c)| {
        *c *= m(&grid.wave(i + 1));
    });
    Ok(())
}

/// `Λ^s = |ξ|^s`; the zero mode maps to `1` for `s = 0` and to `0`
/// otherwise (in particular `Λ⁻¹` annihilates the mean).
pub fn lambda_power(grid: &BoxGrid, spec: &[Complex64], s: f64) -> Spectrum {
    let mut out = spec.to_vec();
    let zero = if s == 0.0 { Complex64::new(1.0, 0.0) } else { ZERO };
    apply_multiplier(grid, &mut out, |w| Complex64::new(w.r.powf(s), 0.0), Some(zero))
        .expect("lengths checked by construction");
    out
}

/// `∂_a` as the multiplier `i·k_odd[a]`.
pub fn partial(grid: &BoxGrid, spec: &[Complex64], axis: usize) -> Spectrum {
    let mut out = spec.to_vec();
    out.par_iter_mut().enumerate().for_each(|(i, c)| {
        let k = grid.wave(i).k_odd[axis];
        *c = Complex64::new(-k * c.im, k * c.re);
    });
    out
}

pub fn gradient(grid: &BoxGrid, spec: &[Complex64]) -> [Spectrum; 3] {
    std::array::from_fn(|a| partial(grid, spec, a))
}

pub fn divergence(grid: &BoxGrid, u: &[Spectrum; 3]) -> Spectrum {
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let k = grid.wave(i).k_odd;
            let s = u[0][i] * k[0] + u[1][i] * k[1] + u[2][i] * k[2];
            Complex64::new(-s.im, s.re)
        })
        .collect()
}

pub fn curl(grid: &BoxGrid, u: &[Spectrum; 3]) -> [Spectrum; 3] {
    let d = |c: usize, a: usize| partial(grid, &u[c], a);
    let (d1u2, d2u1) = (d(2, 1), d(1, 2));
    let (d2u0, d0u2) = (d(0, 2), d(2, 0));
    let (d0u1, d1u0) = (d(1, 0), d(0, 1));
    let sub = |a: &Spectrum, b: &Spectrum| a.iter().zip(b).map(|(x, y)| x - y).collect::<Spectrum>();
    [sub(&d1u2, &d2u1), sub(&d2u0, &d0u2), sub(&d0u1, &d1u0)]
}

/// Zeroes modes outside the 2/3-rule box `|m_a| ≤ n/3`.
pub fn dealias(grid: &BoxGrid, spec: &mut [Complex64]) {
    spec.par_iter_mut().enumerate().for_each(|(i, c)| {
        if !grid.is_retained(i) {
            *c = ZERO;
        }
    });
}

/// Velocity split into its compressible scalar `φ = Λ⁻¹div u`, the
/// divergence-free remainder `psi`, and the spatial mean (which belongs to
/// neither part).
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeParts {
    pub phi: Spectrum,
    pub psi: [Spectrum; 3],
    pub mean: [f64; 3],
}

/// `−i k_odd φ / r_odd`, i.e. `−Λ⁻¹∇φ`, zero where `r_odd = 0`.
pub fn gradient_part(grid: &BoxGrid, phi: &[Complex64]) -> [Spectrum; 3] {
    std::array::from_fn(|a| {
        (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let w = grid.wave(i);
                if w.r_odd == 0.0 {
                    return ZERO;
                }
                let s = w.k_odd[a] / w.r_odd;
                // −i·s·φ
                Complex64::new(s * phi[i].im, -s * phi[i].re)
            })
            .collect()
    })
}

pub fn hodge_split_spectral(grid: &BoxGrid, u: &[Spectrum; 3]) -> HodgeParts {
    let phi: Spectrum = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let w = grid.wave(i);
            if w.r_odd == 0.0 {
                return ZERO;
            }
            let s = (u[0][i] * w.k_odd[0] + u[1][i] * w.k_odd[1] + u[2][i] * w.k_odd[2]) / w.r_odd;
            Complex64::new(-s.im, s.re)
        })
        .collect();
    let g = gradient_part(grid, &phi);
    let mut psi: [Spectrum; 3] = std::array::from_fn(|a| u[a].iter().zip(&g[a]).map(|(x, y)| x - y).collect());
    let mean = std::array::from_fn(|a| u[a][0].re);
    for p in psi.iter_mut() {
        p[0] = ZERO;
    }
    HodgeParts { phi, psi, mean }
}

pub fn hodge_split(u: &VectorField) -> HodgeParts {
    hodge_split_spectral(&u.grid, &u.spectra())
}

/// Inverse of [`hodge_split`]: `u = −Λ⁻¹∇φ + psi + mean`.
pub fn hodge_reconstruct(grid: &BoxGrid, parts: &HodgeParts) -> VectorField {
    let g = gradient_part(grid, &parts.phi);
    let spec: [Spectrum; 3] = std::array::from_fn(|a| {
        let mut s: Spectrum = g[a].iter().zip(&parts.psi[a]).map(|(x, y)| x + y).collect();
        s[0] += Complex64::new(parts.mean[a], 0.0);
        s
    });
    VectorField::from_spectra(*grid, &spec)
}

/// `(L³ Σ (1+r²)^k |c|²)^{1/2}`.
pub fn sobolev_norm_spectral(grid: &BoxGrid, spec: &[Complex64], k: u32) -> f64 {
    let s: f64 = spec
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let w = if k == 0 { 1.0 } else { (1.0 + grid.wave(i).r.powi(2)).powi(k as i32) };
            w * c.norm_sqr()
        })
        .sum();
    (grid.volume() * s).sqrt()
}

pub fn l2_norm_spectral(grid: &BoxGrid, spec: &[Complex64]) -> f64 {
    sobolev_norm_spectral(grid, spec, 0)
}

pub fn sobolev_norm(f: &ScalarField, k: u32) -> Result<f64> {
    check_order(k)?;
    Ok(sobolev_norm_spectral(&f.grid, &f.spectrum(), k))
}

/// Euclidean combination of the component norms.
pub fn sobolev_norm_vector(u: &VectorField, k: u32) -> Result<f64> {
    check_order(k)?;
    let s = u.spectra();
    Ok(s.iter()
        .map(|c| sobolev_norm_spectral(&u.grid, c, k).powi(2))
        .sum::<f64>()
        .sqrt())
}

fn check_order(k: u32) -> Result<()> {
    if k > 4 {
        Err(Error::InvalidInput(format!("Sobolev order must be in 0..=4, got {k}")))
    } else {
        Ok(())
    }
}
