use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{
    dealias, forward_many, inverse_many, read_field_file, sobolev_norm_spectral, write_field_file, BoxGrid,
    ScalarField, Spectrum, VectorField,
};

/// Component names in storage order.
pub const COMPONENT_NAMES: [&str; 8] = [
    "n_plus", "u_plus_x", "u_plus_y", "u_plus_z", "n_minus", "u_minus_x", "u_minus_y", "u_minus_z",
];

/// Scaled fields `(n⁺, u⁺, n⁻, u⁻)` in physical space.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub n_plus: ScalarField,
    pub u_plus: VectorField,
    pub n_minus: ScalarField,
    pub u_minus: VectorField,
    pub t: f64,
}

impl State {
    pub fn zeros(grid: BoxGrid) -> Self {
        Self {
            n_plus: ScalarField::zeros(grid),
            u_plus: VectorField::zeros(grid),
            n_minus: ScalarField::zeros(grid),
            u_minus: VectorField::zeros(grid),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> BoxGrid {
        self.n_plus.grid
    }

    /// Checks that all four fields share one grid.
    pub fn check_grid(&self) -> Result<BoxGrid> {
        let g = self.grid();
        g.check_same(&self.u_plus.grid)?;
        g.check_same(&self.n_minus.grid)?;
        g.check_same(&self.u_minus.grid)?;
        Ok(g)
    }

    fn components(&self) -> [&[f64]; 8] {
        [
            &self.n_plus.values,
            &self.u_plus.comps[0],
            &self.u_plus.comps[1],
            &self.u_plus.comps[2],
            &self.n_minus.values,
            &self.u_minus.comps[0],
            &self.u_minus.comps[1],
            &self.u_minus.comps[2],
        ]
    }

    pub fn to_spectral(&self) -> Result<SpectralState> {
        let grid = self.check_grid()?;
        let v = forward_many(&grid, &self.components());
        let comps: [Spectrum; 8] = v.try_into().expect("eight components");
        Ok(SpectralState { grid, t: self.t, comps })
    }

    pub fn from_spectral(s: &SpectralState) -> Self {
        let g = s.grid;
        let refs: Vec<&[Complex64]> = s.comps.iter().map(|c| c.as_slice()).collect();
        let mut v = inverse_many(&g, &refs).into_iter();
        let mut next = || v.next().expect("eight components");
        let n_plus = ScalarField { grid: g, values: next() };
        let u_plus = VectorField { grid: g, comps: [next(), next(), next()] };
        let n_minus = ScalarField { grid: g, values: next() };
        let u_minus = VectorField { grid: g, comps: [next(), next(), next()] };
        Self {
            n_plus,
            u_plus,
            n_minus,
            u_minus,
            t: s.t,
        }
    }

    /// Writes all eight components in the field-file format.
    pub fn write(&self, path: &Path) -> Result<()> {
        let grid = self.check_grid()?;
        write_field_file(path, &grid, &COMPONENT_NAMES, &self.components())
    }

    /// Reads a state written by [`State::write`]; the time is not stored
    /// and comes back as zero.
    pub fn read(path: &Path) -> Result<Self> {
        let f = read_field_file(path)?;
        if f.names != COMPONENT_NAMES {
            return Err(Error::FieldFormat(format!("expected components {COMPONENT_NAMES:?}, got {:?}", f.names)));
        }
        let g = f.grid;
        let mut it = f.comps.into_iter();
        let mut next = || it.next().expect("eight components");
        Ok(Self {
            n_plus: ScalarField { grid: g, values: next() },
            u_plus: VectorField { grid: g, comps: [next(), next(), next()] },
            n_minus: ScalarField { grid: g, values: next() },
            u_minus: VectorField { grid: g, comps: [next(), next(), next()] },
            t: 0.0,
        })
    }
}

/// Spectral mirror of a [`State`]: coefficients of the eight components in
/// [`COMPONENT_NAMES`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub grid: BoxGrid,
    pub t: f64,
    pub comps: [Spectrum; 8],
}

impl SpectralState {
    pub fn zeros(grid: BoxGrid, t: f64) -> Self {
        Self {
            grid,
            t,
            comps: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); grid.len()]),
        }
    }

    /// `self += a·x`.
    pub fn axpy(&mut self, a: f64, x: &SpectralState) {
        for (s, v) in self.comps.iter_mut().zip(&x.comps) {
            s.par_iter_mut().zip(v.par_iter()).for_each(|(p, q)| *p += q * a);
        }
    }

    pub fn scaled(&self, a: f64) -> SpectralState {
        let mut out = self.clone();
        out.comps
            .iter_mut()
            .for_each(|s| s.par_iter_mut().for_each(|z| *z *= a));
        out
    }

    pub fn sub(&self, other: &SpectralState) -> SpectralState {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn dealias(&mut self) {
        let g = self.grid;
        self.comps.iter_mut().for_each(|s| dealias(&g, s));
    }

    /// Sobolev `H^k` norms of `n⁺`, `u⁺`, `n⁻`, `u⁻` (velocity norms are
    /// Euclidean over components).
    pub fn component_norms(&self, k: u32) -> [f64; 4] {
        let g = &self.grid;
        let h = |i: usize| sobolev_norm_spectral(g, &self.comps[i], k);
        let vec = |i: usize| (h(i).powi(2) + h(i + 1).powi(2) + h(i + 2).powi(2)).sqrt();
        [h(0), vec(1), h(4), vec(5)]
    }

    /// `‖n⁺‖ + ‖u⁺‖ + ‖n⁻‖ + ‖u⁻‖` in `H^k`.
    pub fn total_norm(&self, k: u32) -> f64 {
        self.component_norms(k).iter().sum()
    }

    /// Spatial means of `n⁺` and `n⁻`.
    pub fn mass_means(&self) -> (f64, f64) {
        (self.comps[0][0].re, self.comps[4][0].re)
    }

    /// Largest coefficient difference over all components.
    pub fn max_abs_diff(&self, other: &SpectralState) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }
}
