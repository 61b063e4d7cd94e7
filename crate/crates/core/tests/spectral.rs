mod common;

use common::*;
use nalgebra::Matrix4;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twofluid::spectral::{
    characteristic_coeffs, dispersion_csv, eigenvalues, eta_threshold, high_freq_expansion, lambda1,
    low_freq_expansion, projector_asymptotics, projectors, propagator, propagator_complex, spectral_bound,
    symbol_matrix, Regimes, DISPERSION_HEADER,
};
use twofluid::{Error, ModelCoefficients};

fn coeffs_strategy() -> impl Strategy<Value = ModelCoefficients> {
    any::<u64>().prop_map(|seed| random_unstable(&mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn roots_match_symbol_eigenvalues(c in coeffs_strategy(), lr in -3.0..3.0f64) {
        let r = 10f64.powf(lr);
        let ours = eigenvalues(r, &c);
        let oracle = symbol_eigenvalues(r, &c);
        let scale = oracle.iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(matched_distance(&ours, &oracle) <= 1e-8 * scale);
        let q = characteristic_coeffs(r, &c);
        for z in ours {
            prop_assert!(q.normwise_residual(z) < 1e-10);
            // Conjugate closed.
            prop_assert!(ours.iter().any(|w| (w - z.conj()).norm() <= 1e-12 * scale));
        }
    }

    #[test]
    fn vieta_sum_and_product(c in coeffs_strategy(), r in 0.01..50.0f64) {
        let l = eigenvalues(r, &c);
        let q = characteristic_coeffs(r, &c);
        let sum: Complex64 = l.iter().sum();
        let prod: Complex64 = l.iter().product();
        prop_assert!((sum.re + q.c3).abs() <= 1e-9 * q.c3.abs().max(1.0));
        prop_assert!((prod.re - q.c0).abs() <= 1e-8 * l.iter().map(|z| z.norm()).product::<f64>().max(1e-300));
    }

    #[test]
    fn lambda1_is_below_theta_and_positive(c in coeffs_strategy(), lr in -3.0..3.0f64) {
        let r = 10f64.powf(lr);
        let l = lambda1(r, &c).unwrap();
        prop_assert!(l > 0.0 && l < c.theta);
        prop_assert!((eigenvalues(r, &c)[0].re - l).abs() <= 1e-9 * c.theta.max(1.0));
    }

    #[test]
    fn projector_identities(c in coeffs_strategy(), lr in -1.5..1.5f64) {
        let r = 10f64.powf(lr);
        let d = projectors(r, &c);
        let Some(p) = d.projectors else { return Ok(()) };
        let id = Matrix4::<Complex64>::identity();
        let a = symbol_matrix(r, &c).map(|x| Complex64::new(x, 0.0));
        let sum: Matrix4<Complex64> = p.iter().sum();
        prop_assert!((sum - id).norm() < 1e-8);
        let recon: Matrix4<Complex64> = p.iter().zip(&d.lambdas).map(|(m, l)| m * *l).sum();
        prop_assert!((recon - a).norm() <= 1e-8 * a.norm().max(1.0));
        for i in 0..4 {
            for j in 0..4 {
                let pp = p[i] * p[j];
                let expect = if i == j { p[i] } else { Matrix4::zeros() };
                prop_assert!((pp - expect).norm() <= 1e-8 * p[i].norm().max(1.0));
            }
        }
    }

    #[test]
    fn propagator_matches_taylor_oracle(c in coeffs_strategy(), lr in -1.0..1.0f64, t in 0.0..5.0f64) {
        let r = 10f64.powf(lr);
        let ours = propagator(r, &c, t);
        let oracle = taylor_expm(&(symbol_matrix(r, &c) * t));
        prop_assert!(rel_err(&ours, &oracle) < 1e-6);
        let cx = propagator_complex(r, &c, t);
        prop_assert!(cx.iter().all(|z| z.im.abs() <= 1e-9 * oracle.norm().max(1.0)));
    }

    #[test]
    fn semigroup_property(c in coeffs_strategy(), r in 0.05..5.0f64, s in 0.0..2.0f64, t in 0.0..2.0f64) {
        let lhs = propagator(r, &c, s + t);
        let rhs = propagator(r, &c, s) * propagator(r, &c, t);
        prop_assert!(rel_err(&lhs, &rhs) < 1e-9);
    }

    #[test]
    fn sampled_bound_never_exceeds_theta(c in coeffs_strategy()) {
        let b = spectral_bound(1e-3, 1e3, &c, 200).unwrap();
        prop_assert!(b <= c.theta + 1e-10);
        prop_assert!(b > 0.0);
    }
}

#[test]
fn abstract_theta_and_high_limits() {
    let c = ModelCoefficients::from_direct([1.0, 2.0, 1.0, 1.0], 0.5, 0.5, 0.5, 0.5).unwrap();
    assert!((c.theta - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    assert!((c.kappa3 - 8f64.sqrt()).abs() < 1e-12);
    let l = eigenvalues(100.0, &c);
    assert!((l[1].re + 1.0 + 2f64.sqrt()).abs() < 1e-2);
}

#[test]
fn stable_configs_have_no_growing_root() {
    for fp in [-1.0, 0.0] {
        let (_, c) = canonical_laws(fp).linearize().unwrap();
        assert!(spectral_bound(1e-3, 1e3, &c, 2000).unwrap() <= 1e-12);
        assert!(matches!(lambda1(1.0, &c), Err(Error::StableParameters(_))));
        assert!(matches!(eta_threshold(&c, 0.1), Err(Error::StableParameters(_))));
    }
}

#[test]
fn eta_threshold_is_monotone_in_margin() {
    let c = abstract_coeffs();
    let mut prev = f64::INFINITY;
    for k in 1..10 {
        let v = c.theta * k as f64 / 10.0;
        let eta = eta_threshold(&c, v).unwrap();
        assert!(eta <= prev * (1.0 + 1e-12));
        assert!(lambda1(eta, &c).unwrap() >= c.theta - v - 1e-12);
        prev = eta;
    }
    assert_eq!(eta_threshold(&c, 2.0 * c.theta).unwrap(), 1e-3);
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln() / n, b + y.ln() / n));
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        (a + (x.ln() - mx) * (y.ln() - my), b + (x.ln() - mx).powi(2))
    });
    num / den
}

#[test]
fn low_frequency_defect_is_cubic() {
    let c = abstract_coeffs();
    let reg = Regimes::for_coefficients(&c).unwrap();
    let pts: Vec<(f64, f64)> = (0..20)
        .map(|k| {
            let r = reg.eta2 * 10f64.powf(-2.0 * k as f64 / 19.0);
            (r, low_freq_expansion(r, &c, &reg).unwrap().defect)
        })
        .collect();
    assert!(loglog_slope(&pts) >= 2.7, "{}", loglog_slope(&pts));
    assert!(matches!(
        low_freq_expansion(1.0, &c, &reg),
        Err(Error::OutOfRegime { .. })
    ));
}

#[test]
fn high_frequency_defect_decays_with_distinct_viscosities() {
    let c = ModelCoefficients::from_direct([1.3, 2.1, 0.9, 0.8], 0.75, 0.75, 0.35, 0.35).unwrap();
    let reg = Regimes::for_coefficients(&c).unwrap();
    let pts: Vec<(f64, f64)> = (0..20)
        .map(|k| {
            let r = reg.eta1 * 10f64.powf(2.0 * k as f64 / 19.0);
            (r, high_freq_expansion(r, &c, &reg).unwrap().defect)
        })
        .collect();
    assert!(loglog_slope(&pts) <= -0.8, "{}", loglog_slope(&pts));
}

#[test]
fn projector_leading_orders_converge() {
    let c = ModelCoefficients::from_direct([1.3, 2.1, 0.9, 0.8], 0.75, 0.75, 0.35, 0.35).unwrap();
    let reg = Regimes::for_coefficients(&c).unwrap();
    let low = |r: f64| projector_asymptotics(r, &c, &reg).unwrap().defects;
    let (a, b) = (low(reg.eta2), low(reg.eta2 / 100.0));
    for i in 0..4 {
        assert!(b[i] < a[i] / 10.0, "low P{}: {} -> {}", i + 1, a[i], b[i]);
    }
    let (a, b) = (low(reg.eta1), low(100.0 * reg.eta1));
    for i in 0..4 {
        assert!(b[i] < a[i] / 10.0, "high P{}: {} -> {}", i + 1, a[i], b[i]);
    }
}

#[test]
fn dispersion_export_is_deterministic() {
    let c = abstract_coeffs();
    let a = dispersion_csv(&c, 0.01, 100.0, 50).unwrap();
    let b = dispersion_csv(&c, 0.01, 100.0, 50).unwrap();
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some(DISPERSION_HEADER));
    assert_eq!(lines.count(), 50);
}
