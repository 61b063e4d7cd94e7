//! The invariant suite behind `twofluid verify`. Each check is also exposed
//! on its own so the acceptance test can run it at full size.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use twofluid::evolve::{LinearPropagator, SpectralState, State};
use twofluid::fields::{
    curl, dealias, divergence, gradient_part, hodge_reconstruct, hodge_split, l2_norm_spectral, read_fields,
    sobolev_norm, write_fields,
};
use twofluid::modes::{build_mode, mode_to_spectral};
use twofluid::spectral::{
    characteristic_coeffs, eigenvalues, eta_threshold, expm_pade13, high_freq_expansion, lambda1,
    low_freq_expansion, projector_asymptotics, projectors, propagator, spectral_bound, symbol_matrix, Regimes,
};
use twofluid::{BoxGrid, CapillaryLaw, Laws, ModelCoefficients, PhaseLaw, VectorField, Viscosities};

use crate::config::Model;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }

    fn error(name: &str, e: impl std::fmt::Display) -> Self {
        Self::new(name, false, format!("error: {e}"))
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        for c in &self.checks {
            let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let _ = writeln!(s, "{} of {} checks passed", self.checks.len() - self.failures(), self.checks.len());
        s
    }
}

pub fn canonical_laws(fp: f64) -> Laws {
    Laws {
        phase: PhaseLaw {
            gamma_plus: 2.0,
            gamma_minus: 2.0,
        },
        cap: CapillaryLaw::linear(0.0, fp),
        visc: Viscosities {
            mu_plus: 2.0,
            mu_minus: 2.0,
            lambda_plus: 0.0,
            lambda_minus: 0.0,
        },
    }
}

/// `β = (1, 2, 1, 1)`, `ν± = 1`.
pub fn abstract_coefficients() -> ModelCoefficients {
    ModelCoefficients::from_direct([1.0, 2.0, 1.0, 1.0], 0.5, 0.5, 0.5, 0.5).expect("valid constants")
}

/// Distinct viscosities keep the two viscous roots apart at high frequency.
pub fn split_viscosity_coefficients() -> ModelCoefficients {
    ModelCoefficients::from_direct([1.3, 2.1, 0.9, 0.8], 0.75, 0.75, 0.35, 0.35).expect("valid constants")
}

fn random_laws(rng: &mut impl Rng) -> Laws {
    let mu_plus = rng.gen_range(0.1..3.0);
    let mu_minus = rng.gen_range(0.1..3.0);
    Laws {
        phase: PhaseLaw {
            gamma_plus: rng.gen_range(1.0..3.0),
            gamma_minus: rng.gen_range(1.0..3.0),
        },
        cap: CapillaryLaw::linear(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)),
        visc: Viscosities {
            mu_plus,
            mu_minus,
            lambda_plus: rng.gen_range(-0.05..1.0) * mu_plus,
            lambda_minus: rng.gen_range(-0.05..1.0) * mu_minus,
        },
    }
}

fn random_coefficients(rng: &mut impl Rng) -> ModelCoefficients {
    let beta = [
        rng.gen_range(0.3..2.0),
        rng.gen_range(-3.0..3.0),
        rng.gen_range(-3.0..3.0),
        rng.gen_range(0.3..2.0),
    ];
    let nu: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.1..1.5));
    ModelCoefficients::from_direct(beta, nu[0], nu[1], nu[2], nu[3]).expect("positive ranges")
}

/// `β₁β₄ − β₂β₃ = −𝒞²f′(1)/(√(α₁α₄)ρ⁺)` on random physical laws.
pub fn coefficient_identity(samples: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut done, mut skipped) = (0.0f64, 0, 0);
    while done < samples {
        let laws = random_laws(&mut rng);
        let Ok((eq, c)) = laws.linearize() else {
            skipped += 1;
            continue;
        };
        let lhs = c.beta1 * c.beta4 - c.beta2 * c.beta3;
        let rhs = -eq.c2 * laws.cap.fp / ((c.alpha1 * c.alpha4).sqrt() * eq.rho_plus);
        worst = worst.max((lhs - rhs).abs() / rhs.abs());
        done += 1;
    }
    Check::new(
        "coefficient identity",
        worst <= 1e-10,
        format!("max relative error {worst:.3e} over {samples} laws ({skipped} invalid draws skipped)"),
    )
}

/// Positive root of `ν⁺ν⁻s² + Bs + D` by the textbook formula.
pub fn quadratic_theta(c: &ModelCoefficients) -> f64 {
    let a = c.nu_plus * c.nu_minus;
    let b = c.nu_plus * c.beta4 * c.beta4 + c.nu_minus * c.beta1 * c.beta1;
    let d = c.beta1 * c.beta1 * c.beta4 * c.beta4 - c.beta1 * c.beta2 * c.beta3 * c.beta4;
    (-b + (b * b - 4.0 * a * d).sqrt()) / (2.0 * a)
}

pub fn theta_oracle() -> Check {
    let name = "growth rate oracle";
    let canonical = match canonical_laws(1.0).linearize() {
        Ok((_, c)) => c,
        Err(e) => return Check::error(name, e),
    };
    let abs = abstract_coefficients();
    let e1 = (canonical.theta - 0.125).abs().max((canonical.theta - quadratic_theta(&canonical)).abs());
    let e2 = (abs.theta - (2f64.sqrt() - 1.0)).abs().max((abs.theta - quadratic_theta(&abs)).abs());
    Check::new(
        name,
        e1 <= 1e-12 && e2 <= 1e-12,
        format!("canonical theta = {} (error {e1:.1e}), abstract theta = {} (error {e2:.1e})", canonical.theta, abs.theta),
    )
}

/// Eigenvalues of the companion matrix of the characteristic quartic,
/// polished by two Newton steps on the polynomial.
pub fn companion_eigenvalues(r: f64, c: &ModelCoefficients) -> [Complex64; 4] {
    let q = characteristic_coeffs(r, c).ascending();
    let newton = |z: Complex64| -> Complex64 {
        let (mut p, mut dp) = (Complex64::new(q[4], 0.0), Complex64::new(0.0, 0.0));
        for k in (0..4).rev() {
            dp = dp * z + p;
            p = p * z + q[k];
        }
        if dp.norm() > 0.0 { z - p / dp } else { z }
    };
    // Balance by the root scale so the entries stay O(1).
    let s = (q[0].abs() / q[4]).powf(0.25).max(q[3].abs() / q[4]).max(1e-300);
    let mut m = Matrix4::<f64>::zeros();
    for i in 1..4 {
        m[(i, i - 1)] = 1.0;
    }
    for k in 0..4 {
        m[(k, 3)] = -q[k] / (q[4] * s.powi(4 - k as i32));
    }
    let e = m.complex_eigenvalues();
    std::array::from_fn(|i| newton(newton(e[i] * s)))
}

pub fn matched_distance(a: &[Complex64; 4], b: &[Complex64; 4]) -> f64 {
    let mut used = [false; 4];
    let mut worst = 0.0f64;
    for x in a {
        let (j, d) = (0..4)
            .filter(|&j| !used[j])
            .map(|j| (j, (x - b[j]).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("four candidates");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Roots against the companion matrix, projector identities and the
/// propagator against a scaling-and-squaring exponential, on random draws.
pub fn spectral_oracles(draws: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut roots, mut proj, mut prop) = (0.0f64, 0.0f64, 0.0f64);
    let id = Matrix4::<Complex64>::identity();
    for _ in 0..draws {
        let c = random_coefficients(&mut rng);
        let r_roots = 10f64.powf(rng.gen_range(-3.0..3.0));
        let ours = eigenvalues(r_roots, &c);
        let oracle = companion_eigenvalues(r_roots, &c);
        let scale = oracle.iter().map(|z| z.norm()).fold(1.0, f64::max);
        roots = roots.max(matched_distance(&ours, &oracle) / scale);

        let r = 10f64.powf(rng.gen_range(-1.0..1.0));
        let d = projectors(r, &c);
        if let Some(p) = d.projectors.as_ref() {
            let a = symbol_matrix(r, &c).map(|x| Complex64::new(x, 0.0));
            let sum: Matrix4<Complex64> = p.iter().sum();
            let recon: Matrix4<Complex64> = p.iter().zip(&d.lambdas).map(|(m, l)| m * *l).sum();
            let mut e = (sum - id).norm().max((recon - a).norm() / a.norm().max(1.0));
            for i in 0..4 {
                for j in 0..4 {
                    let expect = if i == j { p[i] } else { Matrix4::zeros() };
                    e = e.max((p[i] * p[j] - expect).norm() / p[i].norm().max(1.0));
                }
            }
            proj = proj.max(e);
        }
        let t = rng.gen_range(0.0..5.0);
        let ours = propagator(r, &c, t);
        let oracle = expm_pade13(&(symbol_matrix(r, &c) * t));
        prop = prop.max((ours - oracle).norm() / oracle.norm());
    }
    Check::new(
        "spectral oracles",
        roots <= 1e-8 && proj <= 1e-8 && prop <= 1e-6,
        format!("{draws} draws: roots {roots:.2e}, projector identities {proj:.2e}, propagator {prop:.2e}"),
    )
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln() / n, b + y.ln() / n));
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        (a + (x.ln() - mx) * (y.ln() - my), b + (x.ln() - mx).powi(2))
    });
    num / den
}

fn geometric(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
}

/// Largest `λ₁(r) − θ` over `samples` geometric points of `[1e−3, 1e3]`.
pub fn lambda1_excess(c: &ModelCoefficients, samples: usize) -> twofluid::Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for r in geometric(1e-3, 1e3, samples) {
        worst = worst.max(lambda1(r, c)? - c.theta);
    }
    Ok(worst)
}

/// Log-log slope of `θ − λ₁(r)` on `[η₁, 100η₁]`.
pub fn gap_decay_slope(c: &ModelCoefficients) -> twofluid::Result<f64> {
    let reg = Regimes::for_coefficients(c)?;
    let mut pts = Vec::new();
    for r in geometric(reg.eta1, 100.0 * reg.eta1, 41) {
        pts.push((r, c.theta - lambda1(r, c)?));
    }
    Ok(loglog_slope(&pts))
}

/// `λ₁ < θ` everywhere and the gap closes at least like `1/r`.
pub fn growth_rate_bound(c: &ModelCoefficients, samples: usize) -> Check {
    let name = "lambda1 below theta";
    match (lambda1_excess(c, samples), gap_decay_slope(c)) {
        (Ok(excess), Ok(slope)) => Check::new(
            name,
            excess < 0.0 && slope <= -0.7,
            format!("max lambda1 - theta = {excess:.3e} over {samples} frequencies; gap decay slope {slope:.3}"),
        ),
        (Err(e), _) | (_, Err(e)) => Check::error(name, e),
    }
}

/// Low- and high-frequency eigenvalue expansions and projector leading
/// orders converge in their regimes.
pub fn expansions() -> Check {
    let name = "asymptotic expansions";
    let run = || -> twofluid::Result<(f64, f64, bool)> {
        let c = abstract_coefficients();
        let reg = Regimes::for_coefficients(&c)?;
        let mut low = Vec::new();
        for r in geometric(reg.eta2 / 100.0, reg.eta2, 20) {
            low.push((r, low_freq_expansion(r, &c, &reg)?.defect));
        }
        let c = split_viscosity_coefficients();
        let reg = Regimes::for_coefficients(&c)?;
        let mut high = Vec::new();
        for r in geometric(reg.eta1, 100.0 * reg.eta1, 20) {
            high.push((r, high_freq_expansion(r, &c, &reg)?.defect));
        }
        let defects = |r: f64| projector_asymptotics(r, &c, &reg).map(|p| p.defects);
        let (a, b) = (defects(reg.eta2)?, defects(reg.eta2 / 100.0)?);
        let (h, k) = (defects(reg.eta1)?, defects(100.0 * reg.eta1)?);
        let shrink = (0..4).all(|i| b[i] < a[i] / 10.0 && k[i] < h[i] / 10.0);
        Ok((loglog_slope(&low), loglog_slope(&high), shrink))
    };
    match run() {
        Ok((lo, hi, shrink)) => Check::new(
            name,
            lo >= 2.7 && hi <= -0.8 && shrink,
            format!("low defect slope {lo:.3}, high defect slope {hi:.3}, projector defects shrink: {shrink}"),
        ),
        Err(e) => Check::error(name, e),
    }
}

/// Largest real part of any eigenvalue over `[1e−3, 1e3]`.
pub fn max_real_part(c: &ModelCoefficients, samples: usize) -> twofluid::Result<f64> {
    spectral_bound(1e-3, 1e3, c, samples)
}

/// No eigenvalue with positive real part for the given coefficients.
pub fn no_unstable_root(c: &ModelCoefficients, samples: usize) -> Check {
    match max_real_part(c, samples) {
        Ok(m) => Check::new(
            "no unstable root",
            m <= 1e-12,
            format!("max Re lambda = {m:.3e} over {samples} frequencies"),
        ),
        Err(e) => Check::error("no unstable root", e),
    }
}

/// Decreasing and vanishing capillary slopes are spectrally stable.
pub fn stability_contrast(samples: usize) -> Check {
    let mut worst = f64::NEG_INFINITY;
    for fp in [-1.0, 0.0] {
        match canonical_laws(fp).linearize().and_then(|(_, c)| max_real_part(&c, samples)) {
            Ok(m) => worst = worst.max(m),
            Err(e) => return Check::error("stability contrast", e),
        }
    }
    Check::new(
        "stability contrast",
        worst <= 1e-12,
        format!("max Re lambda = {worst:.3e} for f'(1) in {{-1, 0}}"),
    )
}

/// Ratio bounds of the growing mode's component norms over `[0, 10/θ]`.
pub fn mode_growth_bounds(c: &ModelCoefficients, vartheta: f64, n: usize) -> Check {
    let name = "growing mode two-sided bound";
    let run = || -> twofluid::Result<(f64, f64)> {
        let eta = eta_threshold(c, vartheta)?;
        let grid = BoxGrid::new(n, 4.0 * PI / eta)?;
        let s0 = mode_to_spectral(&build_mode(eta, c, &grid)?);
        let n0 = s0.component_norms(0);
        let (mut below, mut above) = (0.0f64, 0.0f64);
        let step = LinearPropagator::new(grid, c, 1.0 / c.theta);
        let mut s = s0;
        for _ in 0..10 {
            s = step.apply(&s)?;
            let t = s.t;
            let nt = s.component_norms(0);
            for i in 0..4 {
                let ratio = nt[i] / n0[i];
                below = below.max(1.0 - ratio / ((c.theta - vartheta) * t).exp());
                above = above.max(ratio / (c.theta * t).exp() - 1.0);
            }
        }
        Ok((below, above))
    };
    match run() {
        Ok((below, above)) => Check::new(
            name,
            below <= 1e-6 && above <= 1e-6,
            format!("{n}^3 grid: worst shortfall below e^((theta-vartheta)t) {below:.2e}, worst excess over e^(theta t) {above:.2e}"),
        ),
        Err(e) => Check::error(name, e),
    }
}

/// Seeded random state, dealiased, with unit total `L²` norm.
pub fn random_state(grid: BoxGrid, rng: &mut impl Rng) -> twofluid::Result<SpectralState> {
    let mut st = State::zeros(grid);
    for v in st.n_plus.values.iter_mut().chain(st.n_minus.values.iter_mut()) {
        *v = rng.gen_range(-1.0..1.0);
    }
    for comp in st.u_plus.comps.iter_mut().chain(st.u_minus.comps.iter_mut()) {
        comp.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
    }
    let mut s = st.to_spectral()?;
    s.dealias();
    let norm = s.total_norm(0);
    Ok(s.scaled(1.0 / norm))
}

/// Smallest `C` with `‖U(t)‖ ≤ C e^{θt}‖U₀‖` over random states and
/// `t ∈ [0, 20/θ]`.
pub fn semigroup_prefactor(c: &ModelCoefficients, grid: BoxGrid, states: usize, seed: u64) -> twofluid::Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = 40;
    let prop = LinearPropagator::new(grid, c, 20.0 / c.theta / steps as f64);
    let mut worst = 1.0f64;
    for _ in 0..states {
        let mut s = random_state(grid, &mut rng)?;
        for _ in 0..steps {
            s = prop.apply(&s)?;
            worst = worst.max(s.total_norm(0) / (c.theta * s.t).exp());
        }
    }
    Ok(worst)
}

pub fn semigroup_bound(c: &ModelCoefficients, grid: BoxGrid, states: usize, seed: u64) -> Check {
    match semigroup_prefactor(c, grid, states, seed) {
        Ok(k) => Check::new(
            "semigroup bound",
            k <= 10.0,
            format!("fitted prefactor C = {k:.4} over {states} random states on a {}^3 grid", grid.n),
        ),
        Err(e) => Check::error("semigroup bound", e),
    }
}

fn random_vector(grid: BoxGrid, rng: &mut impl Rng) -> VectorField {
    let mut v = VectorField::zeros(grid);
    for comp in v.comps.iter_mut() {
        comp.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    }
    v
}

/// Field-file round trip, Plancherel and Hodge identities on random fields.
pub fn infrastructure(fields: usize, seed: u64) -> Check {
    let name = "field infrastructure";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let run = |rng: &mut ChaCha8Rng| -> twofluid::Result<(bool, f64, f64)> {
        let mut exact = true;
        let (mut planch, mut hodge) = (0.0f64, 0.0f64);
        for k in 0..fields {
            let grid = BoxGrid::new(8, rng.gen_range(0.5..20.0))?;
            let u = random_vector(grid, rng);
            if k < 10 {
                let mut buf = Vec::new();
                let comps: Vec<&[f64]> = u.comps.iter().map(|c| c.as_slice()).collect();
                write_fields(&mut buf, &grid, &["x", "y", "z"], &comps)?;
                let back = read_fields(buf.as_slice())?;
                exact &= back.grid == grid
                    && back.comps.iter().zip(&u.comps).all(|(a, b)| {
                        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
                    });
            }
            let f = u.component(0);
            let a = f.l2_norm();
            planch = planch
                .max((l2_norm_spectral(&grid, &f.spectrum()) - a).abs() / a)
                .max((sobolev_norm(&f, 0)? - a).abs() / a);

            let parts = hodge_split(&u);
            hodge = hodge.max(divergence(&grid, &parts.psi).iter().map(|z| z.norm()).fold(0.0, f64::max));
            for comp in curl(&grid, &gradient_part(&grid, &parts.phi)) {
                hodge = hodge.max(comp.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
            // Projection: splitting the gradient part again returns it.
            let grad = hodge_reconstruct(
                &grid,
                &twofluid::fields::HodgeParts {
                    phi: parts.phi.clone(),
                    psi: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); grid.len()]),
                    mean: [0.0; 3],
                },
            );
            let again = hodge_split(&grad);
            let mut d = again.phi.iter().zip(&parts.phi).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            d = again.psi.iter().flatten().map(|z| z.norm()).fold(d, f64::max);
            hodge = hodge.max(d);
            let mut orig = u.spectra();
            let mut rec = hodge_reconstruct(&grid, &parts).spectra();
            for s in orig.iter_mut().chain(rec.iter_mut()) {
                dealias(&grid, s);
            }
            for (o, r) in orig.iter().zip(&rec) {
                hodge = hodge.max(o.iter().zip(r).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
            }
        }
        Ok((exact, planch, hodge))
    };
    match run(&mut rng) {
        Ok((exact, planch, hodge)) => Check::new(
            name,
            exact && planch <= 1e-12 && hodge <= 1e-10,
            format!("in-memory round trip bit-exact: {exact}; Plancherel {planch:.2e}; Hodge identities {hodge:.2e} on {fields} fields"),
        ),
        Err(e) => Check::error(name, e),
    }
}

/// Sizes of the quick suite run by `verify`.
#[derive(Debug, Clone, Copy)]
pub struct SuiteSize {
    pub identity_samples: usize,
    pub spectral_draws: usize,
    pub sweep_samples: usize,
    pub mode_grid: usize,
    pub semigroup_states: usize,
    pub semigroup_grid: usize,
    pub fields: usize,
}

impl Default for SuiteSize {
    fn default() -> Self {
        Self {
            identity_samples: 100,
            spectral_draws: 1000,
            sweep_samples: 10_000,
            mode_grid: 32,
            semigroup_states: 100,
            semigroup_grid: 16,
            fields: 100,
        }
    }
}

/// Runs the whole suite. The configuration-independent checks always run;
/// growth checks use the run's coefficients when they are unstable.
pub fn verify(model: &Model, vartheta: Option<f64>, size: SuiteSize, seed: u64) -> Report {
    let mut report = Report::default();
    let c = &model.c;
    report.checks.push(coefficient_identity(size.identity_samples, seed));
    report.checks.push(theta_oracle());
    report.checks.push(spectral_oracles(size.spectral_draws, seed));
    report.checks.push(expansions());
    report.checks.push(stability_contrast(size.sweep_samples));
    report.checks.push(infrastructure(size.fields, seed));
    if c.is_unstable() {
        report.notes.push(format!("unstable configuration, theta = {}", c.theta));
        report.checks.push(growth_rate_bound(c, size.sweep_samples));
        let v = vartheta.unwrap_or(c.theta / 10.0);
        report.checks.push(mode_growth_bounds(c, v, size.mode_grid));
        match BoxGrid::new(size.semigroup_grid, 20.0) {
            Ok(g) => report.checks.push(semigroup_bound(c, g, size.semigroup_states, seed)),
            Err(e) => report.checks.push(Check::error("semigroup bound", e)),
        }
    } else {
        report.notes.push("no unstable root: growth checks skipped".into());
        report.checks.push(no_unstable_root(c, size.sweep_samples));
    }
    report
}
