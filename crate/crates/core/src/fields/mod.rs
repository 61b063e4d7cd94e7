//! Periodic-box stand-in for the whole space: grids, transforms, Fourier
//! multipliers, the Hodge split and Sobolev norms.
//!
//! Spectral coefficients are Fourier-series coefficients,
//! `c_k = DFT(f)_k / N³`, so `f(x) = Σ c_k e^{ik·x}` and
//! `∫|f|² = L³ Σ|c_k|²`. The forward convention is `e^{−ik·x}`, hence
//! `∇ ↔ ik`.

mod fft;
mod grid;
mod io;
mod ops;

pub use fft::Fft3;
pub use grid::{BoxGrid, Wave};
pub use io::{read_fields, read_field_file, write_field_file, write_fields, FieldFile, FIELD_SCHEMA};
pub use ops::{
    apply_multiplier, curl, dealias, divergence, gradient, gradient_part, hodge_reconstruct, hodge_split,
    hodge_split_spectral, l2_norm_spectral, lambda_power, partial, sobolev_norm, sobolev_norm_spectral,
    sobolev_norm_vector, HodgeParts,
};

use num_complex::Complex64;

use crate::error::Result;

/// Spectral coefficients on the full lattice, x-fastest.
pub type Spectrum = Vec<Complex64>;

fn zeros_c(len: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); len]
}

/// Fourier coefficients of a real field.
pub fn forward(grid: &BoxGrid, values: &[f64]) -> Spectrum {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Fft3::get(grid.n).forward(&mut buf);
    let s = 1.0 / grid.len() as f64;
    buf.iter_mut().for_each(|z| *z *= s);
    buf
}

/// Coefficients of two real fields from one complex transform.
pub fn forward_pair(grid: &BoxGrid, a: &[f64], b: &[f64]) -> (Spectrum, Spectrum) {
    let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
    Fft3::get(grid.n).forward(&mut buf);
    let s = 0.5 / grid.len() as f64;
    let mut sa = zeros_c(buf.len());
    let mut sb = zeros_c(buf.len());
    for k in 0..buf.len() {
        let z = buf[k];
        let zm = buf[grid.mirror(k)].conj();
        sa[k] = (z + zm) * s;
        // (z − zm)/(2i)
        let d = (z - zm) * s;
        sb[k] = Complex64::new(d.im, -d.re);
    }
    (sa, sb)
}

/// Coefficients of many real fields, transformed two at a time.
pub fn forward_many(grid: &BoxGrid, fields: &[&[f64]]) -> Vec<Spectrum> {
    let mut out = Vec::with_capacity(fields.len());
    let mut it = fields.chunks(2);
    for pair in &mut it {
        if pair.len() == 2 {
            let (a, b) = forward_pair(grid, pair[0], pair[1]);
            out.push(a);
            out.push(b);
        } else {
            out.push(forward(grid, pair[0]));
        }
    }
    out
}

/// Complex samples of `Σ c_k e^{ik·x}`.
pub fn inverse_complex(grid: &BoxGrid, spec: &[Complex64]) -> Vec<Complex64> {
    let mut buf = spec.to_vec();
    Fft3::get(grid.n).inverse(&mut buf);
    buf
}

/// Real part of the synthesis; exact for conjugate-symmetric input.
pub fn inverse_real(grid: &BoxGrid, spec: &[Complex64]) -> Vec<f64> {
    inverse_complex(grid, spec).into_iter().map(|z| z.re).collect()
}

/// Synthesis of two conjugate-symmetric spectra with one transform.
pub fn inverse_pair(grid: &BoxGrid, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::i();
    let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| x + i * y).collect();
    Fft3::get(grid.n).inverse(&mut buf);
    (buf.iter().map(|z| z.re).collect(), buf.iter().map(|z| z.im).collect())
}

/// Synthesis of many conjugate-symmetric spectra, two per transform.
pub fn inverse_many(grid: &BoxGrid, spectra: &[&[Complex64]]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(spectra.len());
    for pair in spectra.chunks(2) {
        if pair.len() == 2 {
            let (a, b) = inverse_pair(grid, pair[0], pair[1]);
            out.push(a);
            out.push(b);
        } else {
            out.push(inverse_real(grid, pair[0]));
        }
    }
    out
}

/// Real scalar samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: BoxGrid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: BoxGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: BoxGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(crate::Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: BoxGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn spectrum(&self) -> Spectrum {
        forward(&self.grid, &self.values)
    }

    pub fn from_spectrum(grid: BoxGrid, spec: &[Complex64]) -> Self {
        Self {
            grid,
            values: inverse_real(&grid, spec),
        }
    }

    /// `(∫|f|²)^{1/2}` by the rectangle rule (exact for trigonometric
    /// polynomials on the lattice).
    pub fn l2_norm(&self) -> f64 {
        let cell = self.grid.volume() / self.grid.len() as f64;
        (self.values.iter().map(|v| v * v).sum::<f64>() * cell).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Real three-component samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: BoxGrid,
    pub comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: BoxGrid) -> Self {
        Self {
            grid,
            comps: std::array::from_fn(|_| vec![0.0; grid.len()]),
        }
    }

    pub fn from_fn(grid: BoxGrid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            let v = f(grid.point(i));
            for a in 0..3 {
                out.comps[a][i] = v[a];
            }
        }
        out
    }

    pub fn spectra(&self) -> [Spectrum; 3] {
        let (a, b) = forward_pair(&self.grid, &self.comps[0], &self.comps[1]);
        [a, b, forward(&self.grid, &self.comps[2])]
    }

    pub fn from_spectra(grid: BoxGrid, spec: &[Spectrum; 3]) -> Self {
        let (a, b) = inverse_pair(&grid, &spec[0], &spec[1]);
        Self {
            grid,
            comps: [a, b, inverse_real(&grid, &spec[2])],
        }
    }

    /// Euclidean combination of the component `L²` norms.
    pub fn l2_norm(&self) -> f64 {
        let cell = self.grid.volume() / self.grid.len() as f64;
        (self.comps.iter().flatten().map(|v| v * v).sum::<f64>() * cell).sqrt()
    }

    pub fn component(&self, a: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.comps[a].clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn noise(grid: &BoxGrid, seed: u64) -> Vec<f64> {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..grid.len())
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn constant_field_has_single_mode() {
        let g = BoxGrid::new(8, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |_| 2.5);
        let s = f.spectrum();
        assert!((s[0].re - 2.5).abs() < 1e-14);
        assert!(s[1..].iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn cosine_has_two_conjugate_modes() {
        let g = BoxGrid::new(8, 3.0).unwrap();
        let f = ScalarField::from_fn(g, |p| (2.0 * PI * p[0] / 3.0).cos());
        let s = f.spectrum();
        let a = s[g.index(1, 0, 0)];
        let b = s[g.index(7, 0, 0)];
        assert!((a - b.conj()).norm() < 1e-14);
        assert!((a.norm() - 0.5).abs() < 1e-14);
        let rest: f64 = s.iter().map(|z| z.norm_sqr()).sum::<f64>() - a.norm_sqr() - b.norm_sqr();
        assert!(rest < 1e-28);
    }

    #[test]
    fn pair_transforms_match_single() {
        let g = BoxGrid::new(8, 1.7).unwrap();
        let a = noise(&g, 1);
        let b = noise(&g, 2);
        let (sa, sb) = forward_pair(&g, &a, &b);
        let ra = forward(&g, &a);
        let rb = forward(&g, &b);
        for k in 0..g.len() {
            assert!((sa[k] - ra[k]).norm() < 1e-15);
            assert!((sb[k] - rb[k]).norm() < 1e-15);
        }
        let (ia, ib) = inverse_pair(&g, &sa, &sb);
        for k in 0..g.len() {
            assert!((ia[k] - a[k]).abs() < 1e-13);
            assert!((ib[k] - b[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn plancherel() {
        let g = BoxGrid::new(16, 2.3).unwrap();
        let f = ScalarField::from_values(g, noise(&g, 7)).unwrap();
        let spec = l2_norm_spectral(&g, &f.spectrum());
        assert!((spec - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
    }
}
