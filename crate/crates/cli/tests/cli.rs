use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use twofluid::evolve::{State, SERIES_HEADER};
use twofluid::spectral::DISPERSION_HEADER;
use twofluid_cli::config::RunConfig;
use twofluid_cli::CliError;

const LAWS: &str = r#"
[laws.phase]
gamma_plus = 2.0
gamma_minus = 2.0
[laws.cap]
f1 = 0.0
fp = 1.0
[laws.visc]
mu_plus = 2.0
mu_minus = 2.0
lambda_plus = 0.0
lambda_minus = 0.0
"#;

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    let out = dir.join(format!("{name}.out"));
    std::fs::write(&path, format!("output = {:?}\n{body}", out.display().to_string())).unwrap();
    path
}

fn out_dir(cfg: &Path) -> PathBuf {
    PathBuf::from(format!("{}.out", cfg.display()))
}

fn run(args: &[&str], cfg: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twofluid")).args(args).arg(cfg).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn coeffs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", LAWS);
    let a = run(&["coeffs"], &cfg);
    let b = run(&["coeffs"], &cfg);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!((v["theta"].as_f64().unwrap() - 0.125).abs() < 1e-12);
    assert_eq!(std::fs::read(out_dir(&cfg).join("coeffs.json")).unwrap(), a.stdout);
}

#[test]
fn dispersion_and_theta_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", LAWS);
    let o = run(&["dispersion", "--rmin", "0.01", "--rmax", "10", "--samples", "25"], &cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out_dir(&cfg).join("dispersion.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(DISPERSION_HEADER));
    assert_eq!(csv.lines().count(), 26);
    let o = run(&["theta", "--vartheta", "0.01"], &cfg);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["vartheta"].as_f64(), Some(0.01));
    assert!(v["eta1"].as_f64().unwrap() > 0.0);
}

#[test]
fn mode_and_linear_evolution_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "m.toml",
        &format!("{LAWS}\n[experiment]\nt_end = 8.0\ndt = 1.0\nstride = 2\nsnapshot_every = 2\n"),
    );
    let o = run(&["mode"], &cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    let mode = State::read(&out_dir(&cfg).join("mode.field")).unwrap();
    assert_eq!(mode.grid().n, 32);

    let o = run(&["evolve-linear"], &cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out_dir(&cfg).join("series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(SERIES_HEADER));
    let totals: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(totals.len(), 5);
    // The growing mode grows.
    assert!(totals.windows(2).all(|w| w[1] > w[0]));
    // Snapshots at samples 0, 2 and 4.
    assert!(out_dir(&cfg).join("snapshot_00002.field").exists());
}

#[test]
fn nonlinear_run_on_random_data_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{LAWS}\n[grid]\nn = 8\nbox_len = 12.0\n[experiment]\ninit = \"random\"\nseed = 3\neps = 0.01\nt_end = 0.5\ndt = 0.1\nduhamel_steps = [1, 2]\n"
    );
    let cfg = config(dir.path(), "n.toml", &body);
    let a = run(&["evolve-nonlinear"], &cfg);
    assert!(a.status.success(), "{}", stderr(&a));
    let first = std::fs::read(out_dir(&cfg).join("series.csv")).unwrap();
    let b = run(&["evolve-nonlinear"], &cfg);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(first, std::fs::read(out_dir(&cfg).join("series.csv")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v["stopped"].is_null());
    assert_eq!(v["duhamel_orders"].as_array().unwrap().len(), 1);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let both = config(dir.path(), "both.toml", &format!("{LAWS}\n[direct]\nbeta = [1.0, 2.0, 1.0, 1.0]\nnu_plus = 1.0\nnu_minus = 1.0\n"));
    let o = run(&["coeffs"], &both);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ConfigError"));

    let garbage = config(dir.path(), "g.toml", "[laws\n");
    assert_eq!(run(&["coeffs"], &garbage).status.code(), Some(2));
    assert_eq!(run(&["coeffs"], &dir.path().join("missing.toml")).status.code(), Some(2));

    let direct = config(dir.path(), "d.toml", "[direct]\nbeta = [1.0, 2.0, 1.0, 1.0]\nnu_plus = 1.0\nnu_minus = 1.0\n");
    let o = run(&["evolve-nonlinear"], &direct);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let cfg = config(dir.path(), "c.toml", LAWS);
    let o = Command::new(env!("CARGO_BIN_EXE_twofluid"))
        .args(["coeffs"])
        .arg(&cfg)
        .env("TWOFLUID_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn library_errors_exit_three_with_their_name() {
    let dir = tempfile::tempdir().unwrap();
    let bad_gamma = config(dir.path(), "b.toml", &LAWS.replace("gamma_plus = 2.0", "gamma_plus = 0.5"));
    let o = run(&["coeffs"], &bad_gamma);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("InvalidLaw"), "{}", stderr(&o));

    let stable = config(dir.path(), "s.toml", &LAWS.replace("fp = 1.0", "fp = -1.0"));
    let o = run(&["mode"], &stable);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("StableParameters"));

    let coarse = config(dir.path(), "k.toml", &format!("{LAWS}\n[grid]\nn = 16\n"));
    let o = run(&["mode"], &coarse);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("GridTooCoarse"));

    let big_step = config(
        dir.path(),
        "t.toml",
        &format!("{LAWS}\n[grid]\nn = 8\nbox_len = 2.0\n[experiment]\ninit = \"random\"\nt_end = 1.0\ndt = 0.5\n"),
    );
    let o = run(&["evolve-nonlinear"], &big_step);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("StepTooLarge"));
}

#[test]
fn verify_on_stable_config_reports_no_unstable_root() {
    let dir = tempfile::tempdir().unwrap();
    let stable = config(dir.path(), "s.toml", &LAWS.replace("fp = 1.0", "fp = -1.0"));
    let o = run(&["verify"], &stable);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("no unstable root"));
}

#[test]
fn config_validation_rules() {
    assert!(matches!(RunConfig::parse("output = \"x\""), Err(CliError::Config(_))));
    let nan = LAWS.replace("mu_plus = 2.0", "mu_plus = nan");
    assert!(matches!(RunConfig::parse(&nan), Err(CliError::Config(m)) if m.contains("mu_plus")));
    let odd = format!("{LAWS}\n[grid]\nn = 9\n");
    assert!(RunConfig::parse(&odd).is_err());
    let unknown = format!("{LAWS}\n[experiment]\nepsilon = 1.0\n");
    assert!(RunConfig::parse(&unknown).is_err());
    let ok = RunConfig::parse(LAWS).unwrap();
    assert_eq!(ok.grid.n, 32);
    let m = ok.model().unwrap();
    assert!((m.c.theta - 0.125).abs() < 1e-12);

    let direct = RunConfig::parse("[direct]\nbeta = [1.0, 2.0, 1.0, 1.0]\nnu_plus = 1.0\nnu_minus = 1.0\n").unwrap();
    let c = direct.model().unwrap().c;
    assert!((c.theta - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    assert_eq!((c.nu1_plus, c.nu2_plus), (0.5, 0.5));
}
