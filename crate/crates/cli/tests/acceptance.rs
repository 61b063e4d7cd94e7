//! Acceptance criteria 1–10. Each criterion prints one `PASS`/`FAIL` line
//! with its measured values; criteria run one at a time so the runtime
//! limits are measured without contention.

use std::path::Path;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use twofluid::evolve::{escape_experiment, escape_setup, EscapeConfig};
use twofluid::fields::{read_field_file, write_field_file};
use twofluid::{BoxGrid, ModelCoefficients};
use twofluid_cli::verify::{
    canonical_laws, coefficient_identity, expansions, gap_decay_slope, infrastructure, lambda1_excess,
    mode_growth_bounds, semigroup_bound, spectral_oracles, stability_contrast,
};

static SERIAL: Mutex<()> = Mutex::new(());

const SEED: u64 = 20240917;

fn report(id: &str, passed: bool, elapsed: Duration, limit: Option<Duration>, detail: &str) -> bool {
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let ok = passed && in_time;
    let limit = limit.map_or(String::new(), |l| format!(" (limit {:.0?})", l));
    println!(
        "{} criterion {id}: {detail}; runtime {:.2?}{limit}",
        if ok { "PASS" } else { "FAIL" },
        elapsed
    );
    ok
}

fn canonical() -> ModelCoefficients {
    canonical_laws(1.0).linearize().unwrap().1
}

const CANONICAL_TOML: &str = r#"
[laws.phase]
gamma_plus = 2.0
gamma_minus = 2.0
[laws.cap]
f1 = 0.0
fp = FP
[laws.visc]
mu_plus = 2.0
mu_minus = 2.0
lambda_plus = 0.0
lambda_minus = 0.0
"#;

const ABSTRACT_TOML: &str = r#"
[direct]
beta = [1.0, 2.0, 1.0, 1.0]
nu_plus = 1.0
nu_minus = 1.0
"#;

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    let out = dir.join(format!("{name}.out"));
    std::fs::write(&path, format!("output = {:?}\n{body}", out.display().to_string())).unwrap();
    path
}

fn cli(args: &[&str], config: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_twofluid")).args(args).arg(config).output().unwrap()
}

/// `(−B + √(B² − 4ν⁺ν⁻D)) / (2ν⁺ν⁻)` from the raw `β`, `ν` values.
fn quadratic_root(b: [f64; 4], nu_plus: f64, nu_minus: f64) -> f64 {
    let a = nu_plus * nu_minus;
    let bb = nu_plus * b[3] * b[3] + nu_minus * b[0] * b[0];
    let d = b[0] * b[0] * b[3] * b[3] - b[0] * b[1] * b[2] * b[3];
    (-bb + (bb * bb - 4.0 * a * d).sqrt()) / (2.0 * a)
}

#[test]
fn criterion_01_coefficient_identity() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let c = coefficient_identity(100, SEED);
    let ok = report("1", c.passed, t.elapsed(), Some(Duration::from_secs(1)), &c.detail);
    assert!(ok);
}

#[test]
fn criterion_02_theta_oracle() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let dir = tempfile::tempdir().unwrap();
    let t = Instant::now();
    let theta_of = |name: &str, body: &str| -> (f64, serde_json::Value) {
        let out = cli(&["coeffs"], &write_config(dir.path(), name, body));
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        (v["theta"].as_f64().unwrap(), v)
    };
    let (canon, v) = theta_of("canonical.toml", &CANONICAL_TOML.replace("FP", "1.0"));
    let b = ["beta1", "beta2", "beta3", "beta4"].map(|k| v[k].as_f64().unwrap());
    let canon_oracle = quadratic_root(b, v["nu_plus"].as_f64().unwrap(), v["nu_minus"].as_f64().unwrap());
    let (abs, _) = theta_of("abstract.toml", ABSTRACT_TOML);
    let abs_oracle = quadratic_root([1.0, 2.0, 1.0, 1.0], 1.0, 1.0);
    let e1 = (canon - 0.125).abs().max((canon - canon_oracle).abs());
    let e2 = (abs - (2f64.sqrt() - 1.0)).abs().max((abs - abs_oracle).abs());
    let ok = report(
        "2",
        e1 <= 1e-12 && e2 <= 1e-12,
        t.elapsed(),
        Some(Duration::from_secs(1)),
        &format!("canonical theta {canon} (error {e1:.1e}), abstract theta {abs} (error {e2:.1e})"),
    );
    assert!(ok);
}

#[test]
fn criterion_03_spectral_oracles() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let c = spectral_oracles(1000, SEED);
    let ok = report("3", c.passed, t.elapsed(), Some(Duration::from_secs(30)), &c.detail);
    assert!(ok);
}

#[test]
fn criterion_04_growth_rate_gap() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let c = canonical();
    let excess = lambda1_excess(&c, 10_000).unwrap();
    let slope = gap_decay_slope(&c).unwrap();
    let ok = report(
        "4",
        excess < 0.0 && (-1.3..=-0.7).contains(&slope),
        t.elapsed(),
        Some(Duration::from_secs(10)),
        &format!("max lambda1 - theta = {excess:.3e} over 10^4 frequencies; slope of theta - lambda1 on [eta1, 100 eta1] = {slope:.3} (window [-1.3, -0.7])"),
    );
    assert!(ok);
}

#[test]
fn criterion_05_expansions() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let c = expansions();
    let ok = report("5", c.passed, t.elapsed(), Some(Duration::from_secs(10)), &c.detail);
    assert!(ok);
}

#[test]
fn criterion_06_stability_contrast() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let c = stability_contrast(10_000);
    let ok = report("6", c.passed, t.elapsed(), Some(Duration::from_secs(10)), &c.detail);
    assert!(ok);
}

#[test]
fn criterion_07_mode_growth_bounds() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let c = canonical();
    let check = mode_growth_bounds(&c, c.theta / 10.0, 64);
    let ok = report("7", check.passed, t.elapsed(), Some(Duration::from_secs(60)), &check.detail);
    assert!(ok);
}

#[test]
fn criterion_08_semigroup_bound() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let c = canonical();
    let check = semigroup_bound(&c, BoxGrid::new(16, 20.0).unwrap(), 100, SEED);
    let ok = report("8", check.passed, t.elapsed(), Some(Duration::from_secs(60)), &check.detail);
    assert!(ok);
}

#[test]
fn criterion_09_nonlinear_escape() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let laws = canonical_laws(1.0);
    let (_, c) = laws.linearize().unwrap();
    let cfg = EscapeConfig::new(5e-4, 0.05, c.theta).unwrap();
    let (grid, eta) = escape_setup(&cfg, &c, 32).unwrap();
    let r = escape_experiment(&cfg, &laws, &c, &grid, eta).unwrap();
    let elapsed = t.elapsed();

    let (lo, hi) = (c.theta - cfg.vartheta - 0.1 * c.theta, 1.1 * c.theta);
    let a = (lo..=hi).contains(&r.growth_fit);
    let a = report(
        "9a",
        a,
        elapsed,
        None,
        &format!("early growth fit {:.5} in [{lo:.5}, {hi:.5}]", r.growth_fit),
    );
    let b = r.escape_ratio.is_some_and(|x| (x - 1.0).abs() <= 0.25);
    let b = report(
        "9b",
        b,
        elapsed,
        None,
        &format!(
            "L2 escape time {:?} vs predicted {:.3}: ratio {:?} (window [0.75, 1.25])",
            r.t_escape, cfg.t_pred, r.escape_ratio
        ),
    );
    let orders = &r.duhamel_orders;
    let c9 = orders.len() == cfg.duhamel_steps.len() - 1 && orders.iter().all(|o| (1.7..=2.3).contains(o));
    let c9 = report(
        "9c",
        c9,
        elapsed,
        None,
        &format!("Duhamel orders under sample halving {orders:?} (window [1.7, 2.3])"),
    );
    let ok = report(
        "9",
        a && b && c9,
        elapsed,
        None,
        &format!(
            "32^3 grid, dt {:.5}, delta0 {:.4e}, tracking {:.2e}",
            r.dt, r.delta0, r.tracking_max_rel
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_10_infrastructure() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();

    let grid = BoxGrid::new(16, std::f64::consts::E).unwrap();
    let vals: Vec<f64> = (0..grid.len()).map(|i| ((i * 7919) as f64).sin() / 3.0).collect();
    let path = dir.path().join("field.bin");
    write_field_file(&path, &grid, &["f"], &[&vals]).unwrap();
    let back = read_field_file(&path).unwrap();
    let exact = back.grid == grid && back.comps[0].iter().zip(&vals).all(|(a, b)| a.to_bits() == b.to_bits());

    let fields = infrastructure(100, SEED);

    let unstable = cli(&["verify"], &write_config(dir.path(), "canonical.toml", &CANONICAL_TOML.replace("FP", "1.0")));
    let stable = cli(&["verify"], &write_config(dir.path(), "stable.toml", &CANONICAL_TOML.replace("FP", "-1.0")));
    let stable_text = String::from_utf8_lossy(&stable.stdout);
    let verify_ok = unstable.status.code() == Some(0)
        && stable.status.code() == Some(0)
        && stable_text.contains("no unstable root");
    if !verify_ok {
        println!("{}", String::from_utf8_lossy(&unstable.stdout));
        println!("{stable_text}");
    }
    let ok = report(
        "10",
        exact && fields.passed && verify_ok,
        t.elapsed(),
        Some(Duration::from_secs(300)),
        &format!(
            "file round trip bit-exact: {exact}; {}; verify exit codes {:?} (unstable) and {:?} (stable)",
            fields.detail,
            unstable.status.code(),
            stable.status.code()
        ),
    );
    assert!(ok);
}
