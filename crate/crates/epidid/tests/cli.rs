//! Command-line behavior: exit codes, error messages, output schemas.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_epidid"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn simulate_bundle(dir: &Path) -> (String, String, String) {
    let config = dir.join("synth.toml");
    std::fs::write(
        &config,
        r#"
[synth]
n_treated_groups = 3
counties_per_group = 2
control_counties = 4
seed = 5

[synth.effect_by_horizon]
7 = -0.5
"#,
    )
    .unwrap();
    let out = dir.join("sim");
    run_ok(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    (
        out.join("orders.csv").to_str().unwrap().into(),
        out.join("cases.csv").to_str().unwrap().into(),
        out.join("tests.csv").to_str().unwrap().into(),
    )
}

#[test]
fn missing_input_file_fails_naming_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "ingest",
            "--orders",
            "/nonexistent/orders.csv",
            "--cases",
            "/nonexistent/cases.csv",
            "--out",
            tmp.path().join("x").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("/nonexistent/orders.csv"),
        "stderr: {stderr}"
    );
}

#[test]
fn simulated_bundle_ingests_with_zero_drops() {
    let tmp = tempfile::tempdir().unwrap();
    let (orders, cases, tests) = simulate_bundle(tmp.path());
    let out = tmp.path().join("ingest");
    run_ok(&[
        "ingest",
        "--orders",
        &orders,
        "--cases",
        &cases,
        "--tests",
        &tests,
        "--out",
        out.to_str().unwrap(),
    ]);
    let summary = std::fs::read_to_string(out.join("cleaning_summary.txt")).unwrap();
    assert!(summary.contains("unassigned     0"), "summary:\n{summary}");
    assert!(summary.contains("out of window  0"));
    assert!(summary.contains("3 treated cohorts"));
    // The normalized bundle equals the simulated one byte for byte.
    let original = std::fs::read(&cases).unwrap();
    let normalized = std::fs::read(out.join("cases.csv")).unwrap();
    assert_eq!(original, normalized);
}

#[test]
fn estimate_single_horizon_produces_one_model() {
    let tmp = tempfile::tempdir().unwrap();
    let (orders, cases, _) = simulate_bundle(tmp.path());
    let out = tmp.path().join("est");
    run_ok(&[
        "estimate",
        "--orders",
        &orders,
        "--cases",
        &cases,
        "--d",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(out.join("models.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2, "header plus one model:\n{csv}");
    assert!(lines[1].starts_with("cases,7,"));
    // Noiseless world with a -0.5 effect at d = 7: exp(-0.5) - 1.
    let beta3: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!((beta3 - (-0.5)).abs() < 1e-8);
    let pct: f64 = lines[1].split(',').nth(6).unwrap().parse().unwrap();
    assert!((pct - (-0.3934693402873666)).abs() < 1e-8);
}

#[test]
fn event_study_single_d_range_has_one_row_and_fixed_header() {
    let tmp = tempfile::tempdir().unwrap();
    let (orders, cases, _) = simulate_bundle(tmp.path());
    let out = tmp.path().join("ev");
    run_ok(&[
        "event-study",
        "--orders",
        &orders,
        "--cases",
        &cases,
        "--d-min",
        "7",
        "--d-max",
        "7",
        "--outcome",
        "cases",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(out.join("event_study_cases.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "d,beta3,se,ci_low,ci_high,pct,pct_low,pct_high");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("7,"));
}

#[test]
fn counterfactual_zero_effect_world_reports_zero_totals() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("null.toml");
    std::fs::write(
        &config,
        r#"
[synth]
n_treated_groups = 3
counties_per_group = 2
control_counties = 4
seed = 11

[synth.effect_by_horizon]
7 = 0.0
14 = 0.0
21 = 0.0
"#,
    )
    .unwrap();
    let sim = tmp.path().join("sim");
    run_ok(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        sim.to_str().unwrap(),
    ]);
    let out = tmp.path().join("cf");
    run_ok(&[
        "counterfactual",
        "--orders",
        sim.join("orders.csv").to_str().unwrap(),
        "--cases",
        sim.join("cases.csv").to_str().unwrap(),
        "--outcome",
        "cases",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(out.join("counterfactual_cases.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let diff: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        // Counts are huge, so "zero" means tiny relative to the observed.
        let observed: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(diff.abs() < 1e-6 * observed.max(1.0), "line: {line}");
    }
}

#[test]
fn panel_dump_uses_documented_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let (orders, cases, tests) = simulate_bundle(tmp.path());
    let out = tmp.path().join("est");
    run_ok(&[
        "estimate",
        "--orders",
        &orders,
        "--cases",
        &cases,
        "--tests",
        &tests,
        "--d",
        "7",
        "--dump-panels",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(out.join("panel_cases_d7.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "group_id,stratum_id,cluster_id,date,dy,x,p,dlog_tests,weight"
    );
    // 3 cohorts -> 12 rows.
    assert_eq!(lines.count(), 12);
}

#[test]
fn invalid_synth_spec_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.toml");
    std::fs::write(
        &config,
        "[synth]\nn_treated_groups = 0\n\n[synth.effect_by_horizon]\n7 = -0.5\n",
    )
    .unwrap();
    let out = bin()
        .args([
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            tmp.path().join("x").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("n_treated_groups"), "stderr: {stderr}");
}

#[test]
fn table_command_writes_both_outcomes_and_event_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let (orders, cases, _) = simulate_bundle(tmp.path());
    let out = tmp.path().join("tab");
    run_ok(&[
        "table",
        "--orders",
        &orders,
        "--cases",
        &cases,
        "--d",
        "7",
        "--event-window",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    for file in [
        "table_cases.csv",
        "table_fatalities.csv",
        "event_time_growth.csv",
    ] {
        assert!(out.join(file).exists(), "{file} missing");
    }
    let csv = std::fs::read_to_string(out.join("table_cases.csv")).unwrap();
    assert!(csv.starts_with(
        "order_date,n_counties,dy_order_day,dy_after,dy_ctrl_order_day,dy_ctrl_after,diff_treated,diff_ctrl,diff_in_diff"
    ));
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"artifact_version\""));
    assert!(manifest.contains("\"inputs\""));
}

#[test]
fn fe_mode_and_control_weight_flags_reach_the_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let (orders, cases, _) = simulate_bundle(tmp.path());
    let out = tmp.path().join("strict");
    run_ok(&[
        "estimate",
        "--orders",
        &orders,
        "--cases",
        &cases,
        "--d",
        "7",
        "--fe-mode",
        "per-group",
        "--control-weights",
        "paired",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(out.join("models.csv")).unwrap();
    let line = csv.lines().nth(1).unwrap();
    // Per-group effects absorb the treated indicator; the interaction
    // still recovers the injected effect exactly on noiseless data.
    assert!(
        line.ends_with('x') || line.contains(",x;") || line.contains(";x"),
        "x not dropped: {line}"
    );
    let beta3: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
    assert!((beta3 - (-0.5)).abs() < 1e-8);
    let report = std::fs::read_to_string(out.join("model_cases_d7.txt")).unwrap();
    assert!(!report.contains("Mean difference between counties with/without order"));
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"fe_mode\": \"per-group\""));
    assert!(manifest.contains("\"control_weights\": \"paired\""));
}

#[test]
fn config_file_supplies_paths_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    let (orders, cases, _) = simulate_bundle(tmp.path());
    let config = tmp.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "orders = \"{orders}\"\ncases = \"{cases}\"\nout = \"{}\"\nhorizons = [7]\n",
            tmp.path().join("from_config").display()
        ),
    )
    .unwrap();
    run_ok(&["estimate", "--config", config.to_str().unwrap()]);
    assert!(tmp.path().join("from_config").join("models.csv").exists());

    // The flag beats the file's output directory.
    let flag_out = tmp.path().join("from_flag");
    run_ok(&[
        "estimate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        flag_out.to_str().unwrap(),
    ]);
    assert!(flag_out.join("models.csv").exists());
}
