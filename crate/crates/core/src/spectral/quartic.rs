//! Roots of real monic quartics: companion-matrix eigensolve on a rescaled
//! polynomial, then Newton polishing on the original coefficients.

use std::cmp::Ordering;

use nalgebra::Matrix4;
use num_complex::Complex64;

const POLISH_STEPS: usize = 8;

fn horner(c: &[f64; 5], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(c[4], 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for k in (0..4).rev() {
        dp = dp * z + p;
        p = p * z + c[k];
    }
    (p, dp)
}

fn horner_real(c: &[f64; 5], x: f64) -> (f64, f64) {
    let mut p = c[4];
    let mut dp = 0.0;
    for k in (0..4).rev() {
        dp = dp * x + p;
        p = p * x + c[k];
    }
    (p, dp)
}

/// `Σ|c_k||z|^k`, the natural scale of rounding errors in `F(z)`.
pub(crate) fn residual_scale(c: &[f64; 5], z: Complex64) -> f64 {
    let a = z.norm();
    c.iter().rev().fold(0.0, |acc, ck| acc * a + ck.abs())
}

fn polish_real(c: &[f64; 5], mut x: f64) -> f64 {
    let (mut fx, _) = horner_real(c, x);
    for _ in 0..POLISH_STEPS {
        let (_, d) = horner_real(c, x);
        if d == 0.0 || fx == 0.0 {
            break;
        }
        let next = x - fx / d;
        let (fn_, _) = horner_real(c, next);
        if !(fn_.abs() < fx.abs()) {
            break;
        }
        x = next;
        fx = fn_;
    }
    x
}

fn polish_complex(c: &[f64; 5], mut z: Complex64) -> Complex64 {
    let (mut fz, _) = horner(c, z);
    for _ in 0..POLISH_STEPS {
        let (_, d) = horner(c, z);
        if d.norm() == 0.0 || fz.norm() == 0.0 {
            break;
        }
        let next = z - fz / d;
        let (fn_, _) = horner(c, next);
        if !(fn_.norm() < fz.norm()) {
            break;
        }
        z = next;
        fz = fn_;
    }
    z
}

/// Aberth–Ehrlich simultaneous iteration, used only if the Schur route
/// produces non-finite values.
fn aberth(c: &[f64; 5]) -> [Complex64; 4] {
    let bound = 1.0 + c[..4].iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut z: [Complex64; 4] =
        std::array::from_fn(|k| Complex64::from_polar(0.5 * bound, 0.4 + k as f64 * std::f64::consts::FRAC_PI_2));
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..4 {
            let (p, dp) = horner(c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..4).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm() / z[i].norm().max(1e-300));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

fn companion_roots(c: &[f64; 5]) -> [Complex64; 4] {
    // λ = sμ with s balancing the coefficient magnitudes.
    let mut s = 0.0f64;
    for k in 0..4 {
        if c[k] != 0.0 {
            s = s.max(c[k].abs().powf(1.0 / (4 - k) as f64));
        }
    }
    if s == 0.0 {
        return [Complex64::new(0.0, 0.0); 4];
    }
    let b: [f64; 4] = std::array::from_fn(|k| c[k] / s.powi((4 - k) as i32));
    #[rustfmt::skip]
    let m = Matrix4::new(
        0.0, 0.0, 0.0, -b[0],
        1.0, 0.0, 0.0, -b[1],
        0.0, 1.0, 0.0, -b[2],
        0.0, 0.0, 1.0, -b[3],
    );
    let ev = m.complex_eigenvalues();
    let roots: [Complex64; 4] = std::array::from_fn(|i| ev[i] * s);
    if roots.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        roots
    } else {
        aberth(c)
    }
}

/// Roots of `c[4]z⁴ + … + c[0]` (ascending coefficients, `c[4] = 1`),
/// polished and ordered per [`order_roots`]. Conjugate pairs are exact
/// conjugates and real roots have zero imaginary part.
pub fn quartic_roots(c: &[f64; 5]) -> [Complex64; 4] {
    let raw = companion_roots(c);
    let mut reals = Vec::with_capacity(4);
    let mut uppers = Vec::with_capacity(2);
    let mut lowers = 0usize;
    for z in raw {
        if z.im == 0.0 {
            reals.push(z.re);
        } else if z.im > 0.0 {
            uppers.push(z);
        } else {
            lowers += 1;
        }
    }
    let mut out = Vec::with_capacity(4);
    if uppers.len() == lowers {
        for x in reals {
            out.push(Complex64::new(polish_real(c, x), 0.0));
        }
        for z in uppers {
            let p = polish_complex(c, z);
            // Polishing may land on the real axis for a near-double root.
            let p = if p.im > 0.0 { p } else { z };
            out.push(p);
            out.push(p.conj());
        }
    } else {
        out.extend(raw.iter().map(|&z| polish_complex(c, z)));
    }
    let mut roots: [Complex64; 4] = [out[0], out[1], out[2], out[3]];
    order_roots(&mut roots);
    roots
}

/// Real roots first by descending value, then complex roots by descending
/// real part with the positive imaginary member of each pair first.
pub fn order_roots(z: &mut [Complex64; 4]) {
    z.sort_by(|a, b| {
        let ar = a.im == 0.0;
        let br = b.im == 0.0;
        match (ar, br) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => b
                .re
                .partial_cmp(&a.re)
                .unwrap_or(Ordering::Equal)
                .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal)),
        }
    });
}
