//! End-to-end checks of the command-line interface: outputs, exit codes, and
//! the bundled fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cogload")
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn read_csv(path: PathBuf) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let headers: Vec<String> = rdr.headers().unwrap().iter().map(str::to_string).collect();
    let mut rows = vec![headers];
    for record in rdr.records() {
        rows.push(record.unwrap().iter().map(str::to_string).collect());
    }
    rows
}

#[test]
fn simulate_smoke_run_row_count() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    let result = run(&[
        "simulate",
        "--config",
        repo_config("null.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let rows = read_csv(out.join("panel.csv"));
    let metadata: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metadata.json")).unwrap())
            .unwrap();
    let degenerate = metadata["degenerate_events"].as_u64().unwrap() as usize;
    // null.toml: 60 firms x 12 periods
    assert_eq!(rows.len() - 1 + degenerate, 60 * 12);
    assert!(out.join("resolved.toml").exists());
}

#[test]
fn estimate_emits_fit_and_event_study_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    assert!(run(&[
        "simulate",
        "--config",
        repo_config("null.toml").to_str().unwrap(),
        "--out",
        sim.to_str().unwrap(),
    ])
    .status
    .success());
    let est = tmp.path().join("est");
    let result = run(&[
        "estimate",
        "--panel",
        sim.join("panel.csv").to_str().unwrap(),
        "--out",
        est.to_str().unwrap(),
        "--event-study",
    ]);
    assert!(result.status.success());
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(est.join("fit.json")).unwrap()).unwrap();
    assert!(fit["beta_treatment"].is_number());
    // default window [6, 8]: relative periods -6..8 minus the omitted -1
    let rows = read_csv(est.join("event_study.csv"));
    assert_eq!(rows[0], vec!["relative_period", "n_obs", "coefficient", "se"]);
    assert_eq!(rows.len() - 1, 6 + 8 + 1 - 1);
}

#[test]
fn estimate_missing_column_exits_4_with_name() {
    let tmp = tempfile::tempdir().unwrap();
    let panel = tmp.path().join("panel.csv");
    std::fs::write(&panel, "firm_id,period,treated\nf1,0,0\nf1,1,1\nf2,0,0\nf2,1,0\n").unwrap();
    let result = run(&[
        "estimate",
        "--panel",
        panel.to_str().unwrap(),
        "--out",
        tmp.path().join("est").to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("log_speed"), "stderr: {stderr}");
}

#[test]
fn unknown_config_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[sim]\nn_firmz = 3\n").unwrap();
    let result = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn threads_zero_exits_2() {
    let result = run(&["--threads", "0", "sweep", "--out", "/tmp/unused_sweep_dir"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn sweep_grid_is_nondecreasing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let result = run(&[
        "sweep",
        "--out",
        out.to_str().unwrap(),
        "--load-min",
        "1",
        "--load-max",
        "4",
        "--points",
        "3",
    ]);
    assert!(result.status.success());
    let rows = read_csv(out.join("sweep.csv"));
    assert_eq!(rows.len() - 1, 3);
    let vals: Vec<f64> = rows[1..]
        .iter()
        .map(|r| r[1].parse::<f64>().unwrap())
        .collect();
    assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{vals:?}");
}

#[test]
fn textmetrics_fixture_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("tm");
    let result = run(&[
        "textmetrics",
        "--manifest",
        fixture("corpus/manifest.csv").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let rows = read_csv(out.join("metrics.csv"));
    let by_id = |id: &str| {
        rows[1..]
            .iter()
            .find(|r| r[0] == id)
            .unwrap_or_else(|| panic!("no row for {id}"))
            .clone()
    };
    // duplicate pair scores 1.0 both ways
    assert_eq!(by_id("alpha_2023")[5], "1.000000");
    assert_eq!(by_id("beta_2023")[5], "1.000000");
    // distinct document scores 0.0
    assert_eq!(by_id("gamma_2023")[5], "0.000000");
    // hand-crafted 6-word file: fog 2.4
    assert_eq!(by_id("six_word_2023")[3], "2.400000");
}

#[test]
fn textmetrics_empty_manifest_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("tm");
    let result = run(&[
        "textmetrics",
        "--manifest",
        fixture("corpus/empty_manifest.csv").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let rows = read_csv(out.join("metrics.csv"));
    assert_eq!(rows.len(), 1);
}

#[test]
fn placebo_pipeline_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    assert!(run(&[
        "simulate",
        "--config",
        repo_config("null.toml").to_str().unwrap(),
        "--out",
        sim.to_str().unwrap(),
    ])
    .status
    .success());
    let out = tmp.path().join("pl");
    let result = run(&[
        "placebo",
        "--panel",
        sim.join("panel.csv").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--draws",
        "100",
        "--seed",
        "5",
    ]);
    assert!(result.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("placebo.json")).unwrap())
            .unwrap();
    let p = report["p_value"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
    // the null panel has no real effect, so it should not look extreme
    assert!(p > 0.01, "null panel placebo p = {p}");
}
