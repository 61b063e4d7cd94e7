//! Oracles shared by the integration tests. They deliberately avoid the
//! library's own root finder and exponential.
#![allow(dead_code)]

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::Rng;
use twofluid::spectral::symbol_matrix;
use twofluid::{CapillaryLaw, Laws, ModelCoefficients, PhaseLaw, Viscosities};

pub fn canonical_laws(fp: f64) -> Laws {
    Laws {
        phase: PhaseLaw::new(2.0, 2.0).unwrap(),
        cap: CapillaryLaw::linear(0.0, fp),
        visc: Viscosities {
            mu_plus: 2.0,
            mu_minus: 2.0,
            lambda_plus: 0.0,
            lambda_minus: 0.0,
        },
    }
}

pub fn abstract_coeffs() -> ModelCoefficients {
    ModelCoefficients::from_direct([1.0, 2.0, 1.0, 1.0], 0.5, 0.5, 0.5, 0.5).unwrap()
}

/// Random unstable direct coefficients.
pub fn random_unstable(rng: &mut impl Rng) -> ModelCoefficients {
    loop {
        let b1 = rng.gen_range(0.3..2.0);
        let b4 = rng.gen_range(0.3..2.0);
        let b2 = rng.gen_range(0.3..3.0);
        let b3 = rng.gen_range(0.3..3.0);
        if b1 * b4 < 0.9 * b2 * b3 {
            let n1p = rng.gen_range(0.1..1.5);
            let n2p = rng.gen_range(0.1..1.5);
            let n1m = rng.gen_range(0.1..1.5);
            let n2m = rng.gen_range(0.1..1.5);
            return ModelCoefficients::from_direct([b1, b2, b3, b4], n1p, n2p, n1m, n2m).unwrap();
        }
    }
}

/// Eigenvalues of the symbol matrix itself (Schur form), not of the
/// characteristic polynomial's companion matrix.
pub fn symbol_eigenvalues(r: f64, c: &ModelCoefficients) -> [Complex64; 4] {
    let e = symbol_matrix(r, c).complex_eigenvalues();
    [e[0], e[1], e[2], e[3]]
}

/// Largest distance after greedy nearest matching.
pub fn matched_distance(a: &[Complex64; 4], b: &[Complex64; 4]) -> f64 {
    let mut used = [false; 4];
    let mut worst = 0.0f64;
    for x in a {
        let (j, d) = (0..4)
            .filter(|&j| !used[j])
            .map(|j| (j, (x - b[j]).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Taylor series with scaling and squaring; independent of the Padé code.
pub fn taylor_expm(a: &Matrix4<f64>) -> Matrix4<f64> {
    let norm = a.abs().row_sum().max();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a / 2f64.powi(s);
    let mut term = Matrix4::identity();
    let mut sum = Matrix4::identity();
    for k in 1..30 {
        term = term * b / k as f64;
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

pub fn rel_err(a: &Matrix4<f64>, b: &Matrix4<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
