use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cbandit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbandit")).args(args).output().unwrap()
}

fn models() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn run_writes_curves_summary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = cbandit(&[
        "run",
        "--scenario",
        "email",
        "--t",
        "50",
        "--reps",
        "2",
        "--seed",
        "7",
        "--out",
        out,
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let curves = read(&dir.path().join("email_curves.csv"));
    assert!(curves.starts_with("scenario,agent,replication,seed,t,instant_regret,cum_regret\n"));
    assert_eq!(curves.lines().count(), 1 + 4 * 2 * 50);
    assert!(read(&dir.path().join("email_summary.csv")).starts_with("scenario,agent,t,"));
    let manifest: serde_json::Value = serde_json::from_str(&read(&dir.path().join("email_manifest.json"))).unwrap();
    assert_eq!(manifest["config"]["base_seed"], 7);
    assert_eq!(manifest["config"]["horizon"], 50);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let res = cbandit(&[
            "run",
            "--scenario",
            "pure-sim",
            "--t",
            "60",
            "--reps",
            "3",
            "--threads",
            threads,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(res.status.success());
    }
    for f in ["pure-sim_curves.csv", "pure-sim_summary.csv"] {
        assert_eq!(read(&a.path().join(f)), read(&b.path().join(f)), "{f}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        format!(
            "scenario = \"lower-bound\"\nhorizon = 500\nreplications = 1\nagents = [\"ucb\"]\nout = {:?}\n",
            dir.path().join("from-file").to_str().unwrap()
        ),
    )
    .unwrap();
    let res = cbandit(&["run", "--config", cfg.to_str().unwrap(), "--t", "30"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("from-file/lower-bound_manifest.json"))).unwrap();
    assert_eq!(manifest["config"]["horizon"], 30);
    assert_eq!(manifest["config"]["agents"], serde_json::json!(["ucb"]));
}

#[test]
fn scale_and_lower_bound_write_scan_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = cbandit(&[
        "scale",
        "--axis",
        "n",
        "--values",
        "2..3",
        "--t",
        "40",
        "--reps",
        "2",
        "--agents",
        "ucb,c-ucb",
        "--out",
        out,
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let scan = read(&dir.path().join("scale-n_scan.csv"));
    assert!(scan.starts_with("scenario,agent,axis,axis_value,replication,final_regret\n"));
    assert_eq!(scan.lines().count(), 1 + 2 * 2 * 2);

    let res = cbandit(&[
        "lower-bound",
        "--n-values",
        "2,3,4",
        "--delta",
        "0.3",
        "--t",
        "40",
        "--reps",
        "1",
        "--out",
        out,
    ]);
    assert!(res.status.success());
    let scan = read(&dir.path().join("lower-bound_scan.csv"));
    assert_eq!(scan.lines().count(), 1 + 2 * 3);
    assert!(scan.lines().nth(1).unwrap().starts_with("lower-bound,ucb,N,2,0,"));
}

#[test]
fn validate_shipped_models() {
    for m in ["email.json", "pure_sim.json", "lower_bound.json"] {
        let res = cbandit(&["validate", "--model", models().join(m).to_str().unwrap()]);
        assert_eq!(res.status.code(), Some(0), "{m}");
    }
}

#[test]
fn invalid_model_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut json: serde_json::Value = serde_json::from_str(&read(&models().join("email.json"))).unwrap();
    json["cpts"]["X1"] = serde_json::json!([0.5, 0.5, 0.5]);
    std::fs::write(&path, json.to_string()).unwrap();
    let res = cbandit(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("X1"));
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        &["run", "--bogus"][..],
        &["run", "--t", "ten"],
        &["run", "--agents", "c-ucb,nope"],
        &["run", "--scenario", "mars"],
        &["scale", "--values", "2,3"],
        &["frobnicate"],
    ] {
        let res = cbandit(args);
        assert_eq!(res.status.code(), Some(1), "{args:?}");
        assert!(!res.stderr.is_empty());
    }
}

#[test]
fn invalid_configuration_exits_with_one() {
    let res = cbandit(&["run", "--reps", "0", "--out", "/nonexistent/never"]);
    assert_eq!(res.status.code(), Some(1));
    let res = cbandit(&["lower-bound", "--n-values", "12", "--arm-budget", "1000", "--t", "10"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn runtime_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let res = cbandit(&[
        "run",
        "--scenario",
        "pure-sim",
        "--agents",
        "c-ts-beta",
        "--t",
        "20",
        "--reps",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn help_and_listing_succeed() {
    assert!(cbandit(&["--help"]).status.success());
    let res = cbandit(&["list-scenarios"]);
    assert!(res.status.success());
    let text = String::from_utf8_lossy(&res.stdout);
    for s in ["pure-sim", "pure-sim-bayes", "email", "random-instance", "lower-bound"] {
        assert!(text.contains(s));
    }
}
