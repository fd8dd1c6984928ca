use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
scenario_id = "tiny"
snr_db = [0, 10]
m_samples = [6, 8]
estimators = ["oracle", "practical", "none"]
rho_step = 0.5
trials = 8
symbols_per_trial = 20
beta_trials = 1000
seed = 5
"#;

fn eigshrink(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigshrink"))
        .args(args)
        .current_dir(dir)
        .env("EIGSHRINK_BETA_CACHE", dir.join("beta.cache"))
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("cfg.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn missing_config_exits_2_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = eigshrink(dir.path(), &["snr-sweep", "--config", "nowhere/cfg.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere/cfg.toml"));
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "trails = 3\n");
    assert_eq!(
        eigshrink(dir.path(), &["snr-sweep", "--config", &cfg]).status.code(),
        Some(2)
    );
    let cfg = write_config(dir.path(), SMALL);
    // eig-bias needs at least 10^4 trials.
    assert_eq!(
        eigshrink(dir.path(), &["eig-bias", "--config", &cfg]).status.code(),
        Some(2)
    );
}

#[test]
fn dry_run_validates_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = eigshrink(
        dir.path(),
        &["rho-sweep", "--config", &cfg, "--out", "res", "--dry-run"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("scenario tiny valid"), "{text}");
    // 8 trials x 2 m x 3 rho x 2 snr
    assert!(text.contains("96 planned evaluations"), "{text}");
    assert!(!dir.path().join("res").exists());
}

#[test]
fn sweep_writes_layout_and_records_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = eigshrink(
        dir.path(),
        &[
            "snr-sweep",
            "--config",
            &cfg,
            "--out",
            "res",
            "--seed",
            "42",
            "--workers",
            "2",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let base = dir.path().join("res").join("tiny");
    let csv = fs::read_to_string(base.join("snr-sweep.csv")).unwrap();
    assert!(csv.starts_with(
        "scenario_id,estimator,snr_db,inr_db,m,rho_mean,mean_mi,stderr_mi,trials,whitening_failures,seed\n"
    ));
    assert!(csv
        .lines()
        .skip(1)
        .all(|l| l.starts_with("tiny,") && l.ends_with(",42")));
    assert!(base.join("snr-sweep_trials.csv").is_file());
    let manifest = fs::read_to_string(base.join("manifest.txt")).unwrap();
    assert!(manifest.contains("seed = 42\nseed_override = true"), "{manifest}");
    assert!(manifest.contains("version = v"));
    assert!(manifest.contains("scenario_id = \"tiny\""));
    assert!(dir.path().join("beta.cache").is_file());
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    for (out_dir, workers) in [("a", "1"), ("b", "4")] {
        let out = eigshrink(
            dir.path(),
            &["rho-sweep", "--config", &cfg, "--out", out_dir, "--workers", workers],
        );
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["rho-sweep.csv", "rho-sweep_trials.csv"] {
        let a = fs::read(dir.path().join("a/tiny").join(name)).unwrap();
        let b = fs::read(dir.path().join("b/tiny").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn calibrate_beta_fills_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = eigshrink(dir.path(), &["calibrate-beta", "--config", &cfg, "--out", "res"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("res/tiny/calibrate-beta.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let cache = fs::read_to_string(dir.path().join("beta.cache")).unwrap();
    assert!(cache.lines().any(|l| l.starts_with("4 8 1000 5 ")), "{cache}");
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    fs::write(dir.path().join("blocked"), "").unwrap();
    let out = eigshrink(dir.path(), &["snr-sweep", "--config", &cfg, "--out", "blocked"]);
    assert_eq!(out.status.code(), Some(3));
}
