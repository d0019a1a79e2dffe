//! End-to-end tests of the command-line surface.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_conformal-objects")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn CLI")
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("conformal-objects-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn unknown_subcommand_exits_2_with_json_stderr() {
    let out = run_in(&std::env::temp_dir(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let parsed: serde_json::Value = serde_json::from_str(stderr.trim()).expect("json stderr");
    assert_eq!(parsed["kind"], "usage");
}

#[test]
fn runtime_failure_exits_1_with_json_stderr() {
    let dir = tmpdir("runtime-err");
    let out = run_in(
        &dir,
        &["fit", "--data", "missing.csv", "--alpha", "0.1", "--out", "model.json"],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let parsed: serde_json::Value = serde_json::from_str(stderr.trim()).expect("json stderr");
    assert_eq!(parsed["kind"], "runtime");
}

#[test]
fn simulate_twice_writes_identical_artifacts() {
    let dir = tmpdir("determinism");
    let args = [
        "simulate", "--setting", "1", "--n", "120", "--runs", "3", "--alpha", "0.1",
        "--seed", "7", "--test-n", "200", "--bins", "5",
    ];
    let out = run_in(&dir, &[&args[..], &["--out", "a"]].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run_in(&dir, &[&args[..], &["--out", "b"]].concat());
    assert!(out.status.success());
    for suffix in [".json", "_runs.csv", "_bins.csv"] {
        let a = std::fs::read(dir.join(format!("a{suffix}"))).unwrap();
        let b = std::fs::read(dir.join(format!("b{suffix}"))).unwrap();
        assert_eq!(a, b, "artifact {suffix} differs between identical invocations");
    }
}

#[test]
fn fit_then_predict_includes_the_regression_level() {
    let dir = tmpdir("fit-predict");
    // dump a deterministic dataset, fit on it, then predict at x = 0
    let out = run_in(
        &dir,
        &[
            "simulate", "--setting", "1", "--n", "600", "--runs", "1", "--alpha", "0.1",
            "--seed", "11", "--test-n", "100", "--dump-data", "train.csv", "--out", "sim",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run_in(
        &dir,
        &[
            "fit", "--data", "train.csv", "--alpha", "0.1", "--seed", "3",
            "--out", "model.json",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run_in(
        &dir,
        &[
            "predict", "--model", "model.json", "--x", "0", "--candidates", "400",
            "--grid-bounds", "-1.5,3.5", "--out", "set.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // the candidate nearest f(0) = 1 must be a member at alpha = 0.1
    let set = std::fs::read_to_string(dir.join("set.csv")).unwrap();
    let mut best: Option<(f64, bool)> = None;
    for line in set.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let y: f64 = fields[0].parse().unwrap();
        let member = fields[2] == "1";
        if best.is_none_or(|(b, _)| (y - 1.0).abs() < (b - 1.0).abs()) {
            best = Some((y, member));
        }
    }
    let (y, member) = best.unwrap();
    assert!((y - 1.0).abs() < 0.01, "nearest candidate {y}");
    assert!(member, "candidate nearest the regression level must be included");

    // and the model evaluates on a fresh test dump
    let out = run_in(
        &dir,
        &[
            "simulate", "--setting", "1", "--n", "400", "--runs", "1", "--alpha", "0.1",
            "--seed", "12", "--test-n", "100", "--dump-data", "test.csv", "--out", "sim2",
        ],
    );
    assert!(out.status.success());
    let out = run_in(
        &dir,
        &[
            "evaluate", "--model", "model.json", "--test", "test.csv", "--bins", "10",
            "--out", "cov",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.join("cov.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
    let marginal = parsed["marginal"].as_f64().unwrap();
    assert!(marginal > 0.7, "marginal coverage {marginal}");
    let csv = std::fs::read_to_string(dir.join("cov.csv")).unwrap();
    assert!(csv.starts_with("bin_center,coverage,mean_size,n_in_bin"));
}

#[test]
fn dumped_dataset_round_trips_through_load() {
    let dir = tmpdir("dump");
    for (setting, n) in [("4", "80"), ("5", "40"), ("fig-spider", "50")] {
        let out = run_in(
            &dir,
            &[
                "simulate", "--setting", setting, "--n", n, "--runs", "1", "--alpha", "0.2",
                "--seed", "9", "--test-n", "40", "--bins", "4",
                "--dump-data", "data.csv", "--out", "r",
            ],
        );
        assert!(out.status.success(), "{}: {}", setting, String::from_utf8_lossy(&out.stderr));
        let text = std::fs::read_to_string(dir.join("data.csv")).unwrap();
        let ds = conformal_objects::dataset::Dataset::from_text(&text).unwrap();
        assert_eq!(ds.len(), n.parse::<usize>().unwrap());
        let round = ds.to_text().unwrap();
        assert_eq!(text, round);
    }
}

#[test]
fn declared_space_mismatch_is_a_runtime_error() {
    let dir = tmpdir("space-check");
    let out = run_in(
        &dir,
        &[
            "simulate", "--setting", "4", "--n", "60", "--runs", "1", "--alpha", "0.2",
            "--seed", "3", "--test-n", "40", "--bins", "4",
            "--dump-data", "sphere.csv", "--out", "r",
        ],
    );
    assert!(out.status.success());

    let ok = run_in(
        &dir,
        &[
            "fit", "--data", "sphere.csv", "--space", "sphere2", "--alpha", "0.2",
            "--seed", "1", "--out", "m.json",
        ],
    );
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));

    let bad = run_in(
        &dir,
        &[
            "fit", "--data", "sphere.csv", "--space", "euclidean:1", "--alpha", "0.2",
            "--seed", "1", "--out", "m2.json",
        ],
    );
    assert_eq!(bad.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&bad.stderr);
    assert!(stderr.contains("mismatch"), "{stderr}");
}

#[test]
fn sweep_writes_one_row_per_bandwidth() {
    let dir = tmpdir("sweep");
    let out = run_in(
        &dir,
        &[
            "sweep-bandwidth", "--setting", "1", "--n", "120", "--runs", "2",
            "--alpha", "0.1", "--seed", "5", "--test-n", "100",
            "--bandwidths", "0.3", "--candidates", "50", "--out", "sweep.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.trim().lines().collect();
    assert_eq!(rows.len(), 2, "header + one row: {csv}");
    assert!(rows[1].starts_with("0.3,"));
}

#[test]
fn single_index_writes_theta_and_model() {
    let dir = tmpdir("single-index");
    let out = run_in(
        &dir,
        &[
            "simulate", "--setting", "6", "--n", "300", "--runs", "1", "--alpha", "0.1",
            "--seed", "2", "--test-n", "50", "--bins", "4",
            "--dump-data", "train6.csv", "--out", "r6",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run_in(
        &dir,
        &[
            "single-index", "--data", "train6.csv", "--alpha", "0.1", "--seed", "4",
            "--restarts", "4", "--out", "si",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let theta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("si_theta.json")).unwrap()).unwrap();
    let t = theta["theta"]["theta"].as_array().unwrap();
    assert_eq!(t.len(), 2);
    assert!(t[0].as_f64().unwrap() > 0.8, "theta {t:?}");
    let model: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("si_model.json")).unwrap()).unwrap();
    assert!(model["theta"].is_array());
}
