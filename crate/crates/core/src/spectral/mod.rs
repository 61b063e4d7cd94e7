//! Spectral analysis of the compressible-part symbol at one radial
//! frequency `r = |ξ|`.
//!
//! Unknowns are ordered `(n̂⁺, φ̂⁺, n̂⁻, φ̂⁻)` throughout.

mod asymptotics;
mod expm;
mod quartic;

pub use asymptotics::{
    dispersion_csv, dispersion_rows, eta_threshold, high_freq_expansion, high_leading_projectors, low_freq_expansion,
    low_leading_projectors, projector_asymptotics, spectral_bound, ExpansionReport, ProjectorReport, Regime, Regimes,
    DISPERSION_HEADER,
};
pub use expm::expm_pade13;
pub use quartic::{order_roots, quartic_roots};

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::closure::ModelCoefficients;
use crate::error::{Error, Result};

/// Relative eigenvalue separation below which projectors are withheld.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// Real 4×4 symbol `𝒜₁(r)`.
pub type SymbolMatrix = Matrix4<f64>;
/// Complex 4×4 matrix (projectors, complex propagators).
pub type CMatrix4 = Matrix4<Complex64>;

/// Coefficients of `F(λ) = c4λ⁴ + c3λ³ + c2λ² + c1λ + c0`, `c4 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoeffs {
    pub c4: f64,
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl QuarticCoeffs {
    /// Ascending order `[c0, c1, c2, c3, c4]`.
    pub fn ascending(&self) -> [f64; 5] {
        [self.c0, self.c1, self.c2, self.c3, self.c4]
    }

    pub fn eval(&self, x: f64) -> f64 {
        (((self.c4 * x + self.c3) * x + self.c2) * x + self.c1) * x + self.c0
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        (((z * self.c4 + self.c3) * z + self.c2) * z + self.c1) * z + self.c0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        ((4.0 * self.c4 * x + 3.0 * self.c3) * x + 2.0 * self.c2) * x + self.c1
    }

    /// `|F(z)| / Σ|c_k||z|^k`: the backward error of `z` as a root, which
    /// stays at rounding level even when the coefficients span many orders
    /// of magnitude.
    pub fn normwise_residual(&self, z: Complex64) -> f64 {
        let scale = quartic::residual_scale(&self.ascending(), z);
        if scale == 0.0 {
            0.0
        } else {
            self.eval_complex(z).norm() / scale
        }
    }
}

/// Eigen-decomposition of the symbol at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub r: f64,
    pub lambdas: [Complex64; 4],
    /// `None` when the spectrum is numerically degenerate.
    pub projectors: Option<[CMatrix4; 4]>,
    pub degenerate: bool,
}

/// `𝒜₁(r)`: rows `(0, −β₁r, 0, 0)`, `(β₁r, −ν⁺r², β₂r, 0)`, `(0, 0, 0, −β₄r)`,
/// `(β₃r, 0, β₄r, −ν⁻r²)`.
pub fn symbol_matrix(r: f64, c: &ModelCoefficients) -> SymbolMatrix {
    let r2 = r * r;
    #[rustfmt::skip]
    let a = Matrix4::new(
        0.0,          -c.beta1 * r,     0.0,          0.0,
        c.beta1 * r,  -c.nu_plus * r2,  c.beta2 * r,  0.0,
        0.0,          0.0,              0.0,          -c.beta4 * r,
        c.beta3 * r,  0.0,              c.beta4 * r,  -c.nu_minus * r2,
    );
    a
}

/// Characteristic polynomial `det(λI − 𝒜₁(r))`.
pub fn characteristic_coeffs(r: f64, c: &ModelCoefficients) -> QuarticCoeffs {
    let r2 = r * r;
    let r4 = r2 * r2;
    QuarticCoeffs {
        c4: 1.0,
        c3: (c.nu_plus + c.nu_minus) * r2,
        c2: (c.beta1 * c.beta1 + c.beta4 * c.beta4) * r2 + c.nu_plus * c.nu_minus * r4,
        c1: c.mixed_damping() * r4,
        c0: c.det_term * r4,
    }
}

/// The four roots of the characteristic quartic, Newton-polished and
/// ordered: real roots by descending value, then conjugate pairs by
/// descending real part with the positive imaginary member first.
pub fn eigenvalues(r: f64, c: &ModelCoefficients) -> [Complex64; 4] {
    if r == 0.0 {
        return [Complex64::new(0.0, 0.0); 4];
    }
    quartic_roots(&characteristic_coeffs(r, c).ascending())
}

/// The unique positive root of the characteristic quartic, bracketed in
/// `(0, θ]`.
pub fn lambda1(r: f64, c: &ModelCoefficients) -> Result<f64> {
    if !c.is_unstable() {
        return Err(Error::StableParameters(c.beta1 * c.beta4 - c.beta2 * c.beta3));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!("lambda1 needs a positive finite frequency, got {r}")));
    }
    let q = characteristic_coeffs(r, c);
    // F(0) = c0 < 0 and F is increasing on λ > 0 with F(θ) > 0.
    let (mut lo, mut hi) = (0.0f64, c.theta);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if q.eval(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..4 {
        let d = q.derivative(x);
        if d <= 0.0 {
            break;
        }
        let next = x - q.eval(x) / d;
        if !(next >= lo && next <= hi) || next == x {
            break;
        }
        x = next;
    }
    Ok(x)
}

fn min_separation(l: &[Complex64; 4]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..4 {
        for j in (i + 1)..4 {
            m = m.min((l[i] - l[j]).norm());
        }
    }
    m
}

/// Eigenvalues and, when they are well separated, the spectral projectors
/// `Pᵢ = Πⱼ≠ᵢ (𝒜₁ − λⱼI)/(λᵢ − λⱼ)`.
pub fn projectors(r: f64, c: &ModelCoefficients) -> SpectralDecomposition {
    let lambdas = eigenvalues(r, c);
    let scale = lambdas.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let degenerate = !(min_separation(&lambdas) >= DEGENERACY_TOL * scale) || scale == 0.0;
    if degenerate {
        return SpectralDecomposition {
            r,
            lambdas,
            projectors: None,
            degenerate,
        };
    }
    let a: CMatrix4 = symbol_matrix(r, c).map(|x| Complex64::new(x, 0.0));
    let id = CMatrix4::identity();
    let p = std::array::from_fn(|i| {
        let mut m = id;
        for j in 0..4 {
            if j != i {
                m = m * (a - id * lambdas[j]) / (lambdas[i] - lambdas[j]);
            }
        }
        m
    });
    SpectralDecomposition {
        r,
        lambdas,
        projectors: Some(p),
        degenerate,
    }
}

impl SpectralDecomposition {
    /// `Σ e^{λᵢt}Pᵢ` as a complex matrix, `None` if degenerate.
    pub fn exp_complex(&self, t: f64) -> Option<CMatrix4> {
        let p = self.projectors.as_ref()?;
        let mut m = CMatrix4::zeros();
        for (l, pi) in self.lambdas.iter().zip(p) {
            m += pi * (l * t).exp();
        }
        Some(m)
    }
}

/// `e^{t𝒜₁(r)}`, via the spectral sum when the spectrum is simple and a
/// Padé scaling-and-squaring exponential otherwise.
pub fn propagator(r: f64, c: &ModelCoefficients, t: f64) -> Matrix4<f64> {
    if t == 0.0 || r == 0.0 {
        return Matrix4::identity();
    }
    let d = projectors(r, c);
    match d.exp_complex(t) {
        Some(m) => m.map(|z| z.re),
        None => expm_pade13(&(symbol_matrix(r, c) * t)),
    }
}

/// Same as [`propagator`] but keeps the (rounding-level) imaginary part so
/// callers can check it.
pub fn propagator_complex(r: f64, c: &ModelCoefficients, t: f64) -> CMatrix4 {
    if t == 0.0 || r == 0.0 {
        return CMatrix4::identity();
    }
    projectors(r, c)
        .exp_complex(t)
        .unwrap_or_else(|| expm_pade13(&(symbol_matrix(r, c) * t)).map(|x| Complex64::new(x, 0.0)))
}

/// Right eigenvector of `𝒜₁(r)` for a real eigenvalue `λ` with the first
/// component normalised to one (valid whenever `β₁, β₂ ≠ 0`).
pub fn growing_eigenvector(r: f64, lambda: f64, c: &ModelCoefficients) -> Vector4<f64> {
    let n_plus = 1.0;
    let phi_plus = -lambda / (c.beta1 * r);
    let n_minus = -(lambda * lambda + c.beta1 * c.beta1 * r * r + c.nu_plus * lambda * r * r) / (c.beta1 * c.beta2 * r * r);
    let phi_minus = (lambda.powi(3) + c.beta1 * c.beta1 * lambda * r * r + c.nu_plus * lambda * lambda * r * r)
        / (c.beta1 * c.beta2 * c.beta4 * r.powi(3));
    Vector4::new(n_plus, phi_plus, n_minus, phi_minus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abstract_coeffs() -> ModelCoefficients {
        ModelCoefficients::from_direct([1.0, 2.0, 1.0, 1.0], 0.5, 0.5, 0.5, 0.5).unwrap()
    }

    #[test]
    fn symbol_entries() {
        let c = abstract_coeffs();
        let a = symbol_matrix(1.0, &c);
        #[rustfmt::skip]
        let expect = Matrix4::new(
            0.0, -1.0, 0.0, 0.0,
            1.0, -1.0, 2.0, 0.0,
            0.0, 0.0, 0.0, -1.0,
            1.0, 0.0, 1.0, -1.0,
        );
        assert_eq!(a, expect);
        assert_eq!(symbol_matrix(0.0, &c), Matrix4::zeros());
        assert!((symbol_matrix(3.0, &c).trace() + 18.0).abs() < 1e-12);
    }

    #[test]
    fn quartic_coefficients() {
        let c = abstract_coeffs();
        let q = characteristic_coeffs(1.0, &c);
        assert_eq!(q.ascending(), [-1.0, 2.0, 3.0, 2.0, 1.0]);
        assert_eq!(characteristic_coeffs(0.0, &c).ascending(), [0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn abstract_lambda1() {
        let c = abstract_coeffs();
        let q = characteristic_coeffs(1.0, &c);
        assert!(q.eval(0.31) < 0.0 && q.eval(0.32) > 0.0);
        let l1 = lambda1(1.0, &c).unwrap();
        assert!(l1 > 0.31 && l1 < 0.32);
        assert!(l1 < c.theta);
        let ev = eigenvalues(1.0, &c);
        assert!((ev[0].re - l1).abs() < 1e-11 && ev[0].im == 0.0);
        let far = lambda1(100.0, &c).unwrap();
        assert!(far > c.theta - 0.02 && far < c.theta);
    }

    #[test]
    fn stable_lambda1_is_rejected() {
        let c = ModelCoefficients::from_direct([1.0, 0.5, 1.0, 1.0], 0.5, 0.5, 0.5, 0.5).unwrap();
        assert!(matches!(lambda1(1.0, &c), Err(Error::StableParameters(_))));
    }

    #[test]
    fn vieta_relations() {
        let c = abstract_coeffs();
        for &r in &[0.01, 0.3, 1.0, 7.0, 40.0] {
            let q = characteristic_coeffs(r, &c);
            let ev = eigenvalues(r, &c);
            let sum: Complex64 = ev.iter().sum();
            let prod: Complex64 = ev.iter().product();
            assert!((sum.re + q.c3).abs() <= 1e-9 * q.c3.max(1.0), "r={r}");
            assert!((prod.re - q.c0).abs() <= 1e-9 * q.c0.abs().max(1.0), "r={r}");
        }
    }

    #[test]
    fn projector_identities_at_unit_frequency() {
        let c = abstract_coeffs();
        let d = projectors(1.0, &c);
        assert!(!d.degenerate);
        let p = d.projectors.unwrap();
        let id = CMatrix4::identity();
        let sum: CMatrix4 = p.iter().sum();
        assert!((sum - id).norm() < 1e-8);
        let mut recon = CMatrix4::zeros();
        for i in 0..4 {
            recon += p[i] * d.lambdas[i];
            for j in 0..4 {
                let want = if i == j { p[i] } else { CMatrix4::zeros() };
                assert!((p[i] * p[j] - want).norm() < 1e-8);
            }
        }
        let a = symbol_matrix(1.0, &c).map(|x| Complex64::new(x, 0.0));
        assert!((recon - a).norm() < 1e-8);
    }

    #[test]
    fn propagator_basics() {
        let c = abstract_coeffs();
        assert_eq!(propagator(2.0, &c, 0.0), Matrix4::identity());
        let l1 = lambda1(2.0, &c).unwrap();
        let v = growing_eigenvector(2.0, l1, &c);
        let t = 3.0;
        let w = propagator(2.0, &c, t) * v;
        assert!((w - v * (l1 * t).exp()).norm() <= 1e-8 * w.norm());
        let pc = propagator_complex(2.0, &c, t);
        assert!(pc.iter().all(|z| z.im.abs() < 1e-8));
    }

    #[test]
    fn eigenvector_solves_symbol() {
        let c = abstract_coeffs();
        let r = 1.7;
        let l1 = lambda1(r, &c).unwrap();
        let v = growing_eigenvector(r, l1, &c);
        let res = symbol_matrix(r, &c) * v - v * l1;
        assert!(res.norm() < 1e-10);
    }
}
