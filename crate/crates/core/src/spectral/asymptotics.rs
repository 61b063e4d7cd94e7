//! Low/high-frequency expansions of eigenvalues and projectors, sampled
//! spectral bounds, the high-frequency threshold `η₁`, and the dispersion
//! export.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eigenvalues, lambda1, projectors, CMatrix4};
use crate::closure::ModelCoefficients;
use crate::error::{Error, Result};
use crate::fmt;

/// Expansion regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Low,
    High,
}

/// Regime thresholds: expansions hold for `r ≤ eta2` (low) and `r ≥ eta1`
/// (high).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regimes {
    pub eta1: f64,
    pub eta2: f64,
}

impl Regimes {
    pub const DEFAULT_ETA2: f64 = 0.01;

    /// `η₂ = 0.01` and `η₁ = eta_threshold(c, θ/10)`.
    pub fn for_coefficients(c: &ModelCoefficients) -> Result<Self> {
        Ok(Self {
            eta1: eta_threshold(c, c.theta / 10.0)?,
            eta2: Self::DEFAULT_ETA2,
        })
    }
}

/// Predicted versus computed eigenvalues at one frequency. `actual[i]` is
/// the computed eigenvalue matched to `predicted[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub regime: Regime,
    pub r: f64,
    pub predicted: [Complex64; 4],
    pub actual: [Complex64; 4],
    /// `actual[i] = eigenvalues(r)[permutation[i]]`.
    pub permutation: [usize; 4],
    pub defects: [f64; 4],
    pub defect: f64,
}

/// Leading-order projectors against computed ones, in the order of the
/// expansion's predicted eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorReport {
    pub regime: Regime,
    pub r: f64,
    pub leading: [CMatrix4; 4],
    /// Zero matrices when the spectrum is degenerate.
    pub actual: [CMatrix4; 4],
    /// Largest entrywise deviation; infinite when degenerate.
    pub defects: [f64; 4],
    pub degenerate: bool,
}

const PERMUTATIONS: [[usize; 4]; 24] = {
    let mut out = [[0usize; 4]; 24];
    let mut k = 0;
    let mut a = 0;
    while a < 4 {
        let mut b = 0;
        while b < 4 {
            let mut c = 0;
            while c < 4 {
                if a != b && a != c && b != c {
                    let d = 6 - a - b - c;
                    out[k] = [a, b, c, d];
                    k += 1;
                }
                c += 1;
            }
            b += 1;
        }
        a += 1;
    }
    out
};

/// Permutation minimising the total matching distance.
fn best_match(predicted: &[Complex64; 4], actual: &[Complex64; 4]) -> [usize; 4] {
    let mut best = PERMUTATIONS[0];
    let mut best_cost = f64::INFINITY;
    for p in PERMUTATIONS {
        let cost: f64 = (0..4).map(|i| (predicted[i] - actual[p[i]]).norm()).sum();
        if cost < best_cost {
            best_cost = cost;
            best = p;
        }
    }
    best
}

fn report(regime: Regime, r: f64, predicted: [Complex64; 4], c: &ModelCoefficients) -> ExpansionReport {
    let ev = eigenvalues(r, c);
    let permutation = best_match(&predicted, &ev);
    let actual = permutation.map(|j| ev[j]);
    let defects: [f64; 4] = std::array::from_fn(|i| (predicted[i] - actual[i]).norm());
    ExpansionReport {
        regime,
        r,
        predicted,
        actual,
        permutation,
        defects,
        defect: defects.iter().cloned().fold(0.0, f64::max),
    }
}

fn low_roots(c: &ModelCoefficients) -> (Complex64, Complex64) {
    let k1 = Complex64::new(c.kappa1, 0.0);
    let k2 = Complex64::new(c.kappa2, 0.0);
    ((k1 - k2).sqrt(), (k2 + k1).sqrt())
}

/// Two-term low-frequency predictions for `λ₁..λ₄`.
pub fn low_freq_prediction(r: f64, c: &ModelCoefficients) -> [Complex64; 4] {
    let mean = (c.nu_plus + c.nu_minus) / 4.0;
    let d = c.beta1 * c.beta1 - c.beta4 * c.beta4;
    let split = (c.nu_plus * d - c.nu_minus * d) / (8.0 * c.kappa1);
    let (sq, sp) = low_roots(c);
    let i = Complex64::i();
    let r2 = r * r;
    [
        -(mean - split) * r2 + sq * r,
        -(mean - split) * r2 - sq * r,
        -(mean + split) * r2 + i * sp * r,
        -(mean + split) * r2 - i * sp * r,
    ]
}

/// Leading-order high-frequency predictions for `λ₁..λ₄`.
pub fn high_freq_prediction(r: f64, c: &ModelCoefficients) -> [Complex64; 4] {
    let slow = (-c.mixed_damping() - c.kappa3) / (2.0 * c.nu_plus * c.nu_minus);
    [
        Complex64::new(c.theta, 0.0),
        Complex64::new(slow, 0.0),
        Complex64::new(-c.nu_plus * r * r + c.beta1 * c.beta1 / c.nu_plus, 0.0),
        Complex64::new(-c.nu_minus * r * r + c.beta4 * c.beta4 / c.nu_minus, 0.0),
    ]
}

pub fn low_freq_expansion(r: f64, c: &ModelCoefficients, regimes: &Regimes) -> Result<ExpansionReport> {
    if !(r > 0.0 && r <= regimes.eta2) {
        return Err(Error::OutOfRegime {
            r,
            regime: "low",
            threshold: regimes.eta2,
        });
    }
    Ok(report(Regime::Low, r, low_freq_prediction(r, c), c))
}

pub fn high_freq_expansion(r: f64, c: &ModelCoefficients, regimes: &Regimes) -> Result<ExpansionReport> {
    if !(r >= regimes.eta1) || !r.is_finite() {
        return Err(Error::OutOfRegime {
            r,
            regime: "high",
            threshold: regimes.eta1,
        });
    }
    Ok(report(Regime::High, r, high_freq_prediction(r, c), c))
}

/// Leading-order low-frequency projector for the eigenvalue whose leading
/// term is `σ·√(κ₁−κ₂)·r`, `σ = ±1`, written in terms of `q = −σ√(κ₁−κ₂)`.
fn low_real_pair(c: &ModelCoefficients, q: Complex64) -> CMatrix4 {
    let (b1, b2, b3, b4) = (c.beta1, c.beta2, c.beta3, c.beta4);
    let k = c.kappa1;
    let a = 2.0 * k;
    let d = b1 * b1 - b4 * b4;
    let z = |x: f64| Complex64::new(x, 0.0);
    let e8 = 8.0 * k;
    let e4 = 4.0 * k;
    #[rustfmt::skip]
    let m = CMatrix4::new(
        z((a - d) / e8),                               z(b1 * (a - d) / e8) / q,  z(-b1 * b2 / e4),                            z(-b1 * b2 * b4 / e4) / q,
        z(b1 * (d - a) + 2.0 * b2 * b3 * b4) / (q * e8), z((a - d) / e8),           -q * (b2 / e4),                              z(-b2 * b4 / e4),
        z(-b3 * b4 / e4),                              z(-b1 * b3 * b4 / e4) / q, z((a + d) / e8),                             z(b4 * (a + d) / e8) / q,
        -q * (b3 / e4),                                z(-b1 * b3 / e4),          z(b4 * (-d - a) + 2.0 * b1 * b2 * b3) / (q * e8), z((a + d) / e8),
    );
    m
}

/// Leading-order low-frequency projector for the eigenvalue with leading
/// term `+i√(κ₁+κ₂)·r`; its conjugate belongs to the partner.
fn low_complex_upper(c: &ModelCoefficients, p: Complex64) -> CMatrix4 {
    let (b1, b2, b3, b4) = (c.beta1, c.beta2, c.beta3, c.beta4);
    let k = c.kappa1;
    let a = 2.0 * k;
    let d = b1 * b1 - b4 * b4;
    let z = |x: f64| Complex64::new(x, 0.0);
    let i = Complex64::i();
    let e8 = 8.0 * k;
    let e4 = 4.0 * k;
    #[rustfmt::skip]
    let m = CMatrix4::new(
        z((a + d) / e8),                                      i * b1 * (a + d) / (p * e8), z(b1 * b2 / e4),                                         i * b1 * b2 * b4 / (p * e4),
        -i * (b1 * (d + a) + 2.0 * b2 * b3 * b4) / (p * e8),  z((a + d) / e8),             -i * b2 * p / e4,                                        z(b2 * b4 / e4),
        z(b3 * b4 / e4),                                      i * b1 * b3 * b4 / (p * e4), z((a - d) / e8),                                         i * b4 * (a - d) / (p * e8),
        -i * b3 * p / e4,                                     z(b1 * b3 / e4),             -i * (b4 * (-d + a) + 2.0 * b1 * b2 * b3) / (p * e8),    z((a - d) / e8),
    );
    m
}

/// Leading-order projectors in the low regime, in the order of
/// [`low_freq_prediction`].
pub fn low_leading_projectors(c: &ModelCoefficients) -> [CMatrix4; 4] {
    let (sq, sp) = low_roots(c);
    let upper = low_complex_upper(c, sp);
    [low_real_pair(c, -sq), low_real_pair(c, sq), upper, upper.conjugate()]
}

/// Leading-order projectors in the high regime, in the order of
/// [`high_freq_prediction`].
pub fn high_leading_projectors(c: &ModelCoefficients) -> [CMatrix4; 4] {
    let k3 = c.kappa3;
    let b11 = c.nu_plus * c.beta4 * c.beta4 - c.nu_minus * c.beta1 * c.beta1;
    let off13 = c.beta1 * c.beta2 * c.nu_minus / k3;
    let off31 = c.beta3 * c.beta4 * c.nu_plus / k3;
    let z = |x: f64| Complex64::new(x, 0.0);
    let mut p1 = CMatrix4::zeros();
    p1[(0, 0)] = z((b11 + k3) / (2.0 * k3));
    p1[(0, 2)] = z(-off13);
    p1[(2, 0)] = z(-off31);
    p1[(2, 2)] = z((-b11 + k3) / (2.0 * k3));
    let mut p2 = CMatrix4::zeros();
    p2[(0, 0)] = z((-b11 + k3) / (2.0 * k3));
    p2[(0, 2)] = z(off13);
    p2[(2, 0)] = z(off31);
    p2[(2, 2)] = z((b11 + k3) / (2.0 * k3));
    let mut p3 = CMatrix4::zeros();
    p3[(1, 1)] = z(1.0);
    let mut p4 = CMatrix4::zeros();
    p4[(3, 3)] = z(1.0);
    [p1, p2, p3, p4]
}

fn max_entry(m: &CMatrix4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Compares computed projectors with the leading-order matrices of the
/// regime containing `r`.
pub fn projector_asymptotics(r: f64, c: &ModelCoefficients, regimes: &Regimes) -> Result<ProjectorReport> {
    let (regime, exp, leading) = if r > 0.0 && r <= regimes.eta2 {
        (Regime::Low, low_freq_expansion(r, c, regimes)?, low_leading_projectors(c))
    } else if r >= regimes.eta1 && r.is_finite() {
        (Regime::High, high_freq_expansion(r, c, regimes)?, high_leading_projectors(c))
    } else {
        return Err(Error::OutOfRegime {
            r,
            regime: "low or high",
            threshold: if r <= regimes.eta2 { regimes.eta2 } else { regimes.eta1 },
        });
    };
    let d = projectors(r, c);
    match d.projectors {
        Some(p) => {
            let actual = exp.permutation.map(|j| p[j]);
            let defects = std::array::from_fn(|i| max_entry(&(actual[i] - leading[i])));
            Ok(ProjectorReport {
                regime,
                r,
                leading,
                actual,
                defects,
                degenerate: false,
            })
        }
        None => Ok(ProjectorReport {
            regime,
            r,
            leading,
            actual: [CMatrix4::zeros(); 4],
            defects: [f64::INFINITY; 4],
            degenerate: true,
        }),
    }
}

/// Geometric sample points on `[lo, hi]`; a single sample is `lo`.
pub(crate) fn geometric_samples(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![lo],
        n => {
            let ratio = (hi / lo).ln();
            (0..n)
                .map(|k| if k + 1 == n { hi } else { lo * (ratio * k as f64 / (n - 1) as f64).exp() })
                .collect()
        }
    }
}

/// `max_r maxᵢ Re λᵢ(r)` over geometrically spaced samples of `[r_lo, r_hi]`.
pub fn spectral_bound(r_lo: f64, r_hi: f64, c: &ModelCoefficients, samples: usize) -> Result<f64> {
    if !(r_lo > 0.0 && r_hi >= r_lo && r_hi.is_finite()) || samples == 0 {
        return Err(Error::InvalidInput(format!(
            "spectral_bound needs 0 < r_lo <= r_hi and samples > 0, got [{r_lo}, {r_hi}] with {samples}"
        )));
    }
    Ok(geometric_samples(r_lo, r_hi, samples)
        .par_iter()
        .map(|&r| eigenvalues(r, c).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
        .reduce(|| f64::NEG_INFINITY, f64::max))
}

const ETA_PROBE_MIN: f64 = 1e-3;
const ETA_PROBE_MAX: f64 = 1e4;
const ETA_PROBES_PER_DECADE: usize = 40;

/// Smallest frequency beyond which `λ₁(r) ≥ θ − ϑ` on a logarithmic probe
/// grid over `[1e−3, 1e4]`, refined by bisection. Beyond the ceiling the
/// gap `θ − λ₁` is far below any useful margin.
pub fn eta_threshold(c: &ModelCoefficients, vartheta: f64) -> Result<f64> {
    if !c.is_unstable() {
        return Err(Error::StableParameters(c.beta1 * c.beta4 - c.beta2 * c.beta3));
    }
    if !(vartheta > 0.0) || !vartheta.is_finite() {
        return Err(Error::InvalidInput(format!("vartheta must be positive and finite, got {vartheta}")));
    }
    if vartheta >= c.theta {
        return Ok(ETA_PROBE_MIN);
    }
    let target = c.theta - vartheta;
    let decades = (ETA_PROBE_MAX / ETA_PROBE_MIN).log10().round() as usize;
    let probes = geometric_samples(ETA_PROBE_MIN, ETA_PROBE_MAX, decades * ETA_PROBES_PER_DECADE + 1);
    let ok = |r: f64| -> Result<bool> { Ok(lambda1(r, c)? >= target) };
    let mut last_bad = None;
    for (k, &r) in probes.iter().enumerate() {
        if !ok(r)? {
            last_bad = Some(k);
        }
    }
    let k = match last_bad {
        None => return Ok(ETA_PROBE_MIN),
        Some(k) if k + 1 == probes.len() => {
            return Err(Error::NoConvergence(format!(
                "lambda1 stays below theta - vartheta up to r = {ETA_PROBE_MAX}"
            )))
        }
        Some(k) => k,
    };
    let (mut lo, mut hi) = (probes[k], probes[k + 1]);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

pub const DISPERSION_HEADER: &str = "r,re_l1,im_l1,re_l2,im_l2,re_l3,im_l3,re_l4,im_l4,theta";

/// Sample points for the dispersion export: geometric when `rmin > 0`,
/// uniform otherwise.
fn dispersion_samples(rmin: f64, rmax: f64, samples: usize) -> Vec<f64> {
    if rmin > 0.0 {
        geometric_samples(rmin, rmax, samples)
    } else if samples == 1 {
        vec![rmin]
    } else {
        (0..samples)
            .map(|k| rmin + (rmax - rmin) * k as f64 / (samples - 1) as f64)
            .collect()
    }
}

/// One row per sample: `r`, the ordered eigenvalues as (re, im) pairs, `θ`.
pub fn dispersion_rows(c: &ModelCoefficients, rmin: f64, rmax: f64, samples: usize) -> Result<Vec<[f64; 10]>> {
    if !(rmin >= 0.0 && rmax >= rmin && rmax.is_finite()) || samples == 0 {
        return Err(Error::InvalidInput(format!(
            "dispersion needs 0 <= rmin <= rmax and samples > 0, got [{rmin}, {rmax}] with {samples}"
        )));
    }
    Ok(dispersion_samples(rmin, rmax, samples)
        .par_iter()
        .map(|&r| {
            let ev = eigenvalues(r, c);
            [r, ev[0].re, ev[0].im, ev[1].re, ev[1].im, ev[2].re, ev[2].im, ev[3].re, ev[3].im, c.theta]
        })
        .collect())
}

pub fn dispersion_csv(c: &ModelCoefficients, rmin: f64, rmax: f64, samples: usize) -> Result<String> {
    let rows = dispersion_rows(c, rmin, rmax, samples)?;
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(DISPERSION_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", fmt::row(&row));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abstract_coeffs() -> ModelCoefficients {
        ModelCoefficients::from_direct([1.0, 2.0, 1.0, 1.0], 0.5, 0.5, 0.5, 0.5).unwrap()
    }

    #[test]
    fn permutations_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for p in PERMUTATIONS {
            let mut s = p;
            s.sort();
            assert_eq!(s, [0, 1, 2, 3]);
            assert!(seen.insert(p));
        }
    }

    #[test]
    fn low_prediction_values() {
        let c = abstract_coeffs();
        let p = low_freq_prediction(0.01, &c);
        assert!((p[0].re - 0.0063859).abs() < 1e-7);
        assert!((p[2].im - (1.0 + 2f64.sqrt()).sqrt() * 0.01).abs() < 1e-15);
        let reg = Regimes { eta1: 10.0, eta2: 0.01 };
        let rep = low_freq_expansion(0.01, &c, &reg).unwrap();
        assert!(rep.defect < 1e-5);
        assert!((rep.actual[2].im - p[2].im).abs() < 1e-5);
        assert!(matches!(low_freq_expansion(0.02, &c, &reg), Err(Error::OutOfRegime { .. })));
    }

    #[test]
    fn high_prediction_limits() {
        let c = abstract_coeffs();
        let p = high_freq_prediction(100.0, &c);
        assert!((p[0].re - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((p[1].re + 1.0 + 2f64.sqrt()).abs() < 1e-14);
        let reg = Regimes { eta1: 10.0, eta2: 0.01 };
        let rep = high_freq_expansion(100.0, &c, &reg).unwrap();
        assert!(rep.defects[0] < 1e-3 && rep.defects[1] < 1e-1);
        assert!(matches!(high_freq_expansion(5.0, &c, &reg), Err(Error::OutOfRegime { .. })));
    }

    #[test]
    fn low_leading_entry() {
        let c = abstract_coeffs();
        let p = low_leading_projectors(&c);
        // Displayed (1,1) entry (2κ₁ + β₄² − β₁²)/(8κ₁) = 1/4.
        assert!((p[0][(0, 0)].re - 0.25).abs() < 1e-15);
        assert!((p[1][(0, 0)].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn projectors_converge_at_low_frequency() {
        let c = abstract_coeffs();
        let reg = Regimes { eta1: 10.0, eta2: 0.01 };
        let a = projector_asymptotics(1e-3, &c, &reg).unwrap();
        let b = projector_asymptotics(1e-4, &c, &reg).unwrap();
        for i in 0..4 {
            assert!(b.defects[i] < a.defects[i], "{i}: {:?} {:?}", a.defects, b.defects);
            assert!(b.defects[i] < 1e-2);
        }
    }

    #[test]
    fn eta_threshold_behaviour() {
        let c = abstract_coeffs();
        let e = eta_threshold(&c, 0.1).unwrap();
        assert!(lambda1(e, &c).unwrap() >= c.theta - 0.1);
        let e2 = eta_threshold(&c, 0.01).unwrap();
        assert!(e2 > e);
        assert_eq!(eta_threshold(&c, 1.0).unwrap(), ETA_PROBE_MIN);
    }

    #[test]
    fn bound_single_sample() {
        let c = abstract_coeffs();
        let b = spectral_bound(2.0, 2.0, &c, 1).unwrap();
        let ev = eigenvalues(2.0, &c);
        assert_eq!(b, ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max));
    }

    #[test]
    fn dispersion_shape() {
        let c = abstract_coeffs();
        let csv = dispersion_csv(&c, 0.1, 10.0, 5).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], DISPERSION_HEADER);
        assert_eq!(lines.len(), 6);
        assert!(lines[1].starts_with("0.1,"));
        assert!(lines[5].starts_with("10,") || lines[5].starts_with("10.0,"));
    }
}
