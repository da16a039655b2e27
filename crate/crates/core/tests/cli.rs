use std::path::Path;
use std::process::{Command, Output};

use tailgap::experiments::SweepTable;
use tailgap::PushforwardResult;

fn tailgap(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_tailgap"))
        .args(&args[..1])
        .arg("--config")
        .arg(&cfg)
        .args(&args[1..])
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "stderr: {text}");
    serde_json::from_str(lines[0]).unwrap()
}

#[test]
fn decompose_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = tailgap(
        dir.path(),
        &["decompose", "--out", "d.csv"],
        r#"{"distribution":{"kind":"pareto","scale":1,"tail_index":2},"thresholds":[1,2,4]}"#,
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "K,threshold_term,integral_term,total,quadrature_error");
    assert!(lines[2].starts_with("2,0.5,0.5,1,"));
    assert!(!csv.contains('\r'));
    // no temporary files left behind
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2);
}

#[test]
fn stdout_when_no_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = tailgap(
        dir.path(),
        &["band"],
        r#"{"pareto_tail":{"scale":1,"tail_index":1},"p_grid":[0.1],"p_halfwidth":0.05}"#,
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "p_center,p_halfwidth,k_low,k_center,k_high\n0.1,0.05,6.66666666667,10,20\n"
    );
}

#[test]
fn propagate_json_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let out = tailgap(
        dir.path(),
        &["propagate", "--format", "json", "--out", "p.json"],
        r#"{"beta":{"a":1,"b":1},"pareto_tail":{"scale":1,"tail_index":1},"samples":5000}"#,
    );
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("p.json")).unwrap();
    assert!(!text.contains("Infinity") && !text.contains("NaN"));
    let r: PushforwardResult = serde_json::from_str(&text).unwrap();
    assert!(!r.mean.is_finite());
    assert!(!r.variance.is_finite());
    assert!(!r.mc_reliable);
}

#[test]
fn experiment_json_reparses_as_sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = tailgap(
        dir.path(),
        &["experiment", "--format", "json"],
        r#"{"experiment":"skewness","threshold":3,"sigma_grid":[2,3]}"#,
    );
    assert_eq!(out.status.code(), Some(0));
    let t: SweepTable = serde_json::from_slice(&out.stdout).unwrap();
    assert!(t.verdict.pass);
    assert_eq!(t.metric_names(), vec!["p_k", "g_k", "skewness", "qualifies"]);
}

#[test]
fn exit_status_validation() {
    let dir = tempfile::tempdir().unwrap();
    let out = tailgap(dir.path(), &["decompose"], r#"{"thresholds":[1],"unknown":true}"#);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "validation");

    let out = tailgap(dir.path(), &["decompose"], r#"{"thresholds":[1]}"#);
    assert_eq!(out.status.code(), Some(1));

    let out = tailgap(dir.path(), &["eval"], r#"{"distribution":{"kind":"pareto","scale":-1,"tail_index":2},"thresholds":[1]}"#);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_status_domain() {
    let dir = tempfile::tempdir().unwrap();
    let out = tailgap(
        dir.path(),
        &["band"],
        r#"{"pareto_tail":{"scale":1,"tail_index":1},"p_grid":[0.1],"p_halfwidth":0.1}"#,
    );
    assert_eq!(out.status.code(), Some(2));
    let diag = stderr_json(&out);
    assert_eq!(diag["error"], "domain");
    assert!(diag["message"].as_str().unwrap().contains("unbounded"));

    let out = tailgap(
        dir.path(),
        &["experiment"],
        r#"{"experiment":"skewness","threshold":3,"sigma_grid":[0.5,1.0]}"#,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_status_failed_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = tailgap(dir.path(), &["experiment", "--out", "c.csv"], r#"{"experiment":"pit","control":true}"#);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["verdict"], "fail");
    assert!(dir.path().join("c.csv").exists());
}

#[test]
fn bad_thread_setting_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"experiment":"amplification","alpha_list":[1],"p_grid":[0.1]}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_tailgap"))
        .args(["experiment", "--config"])
        .arg(&cfg)
        .env("TAILGAP_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_subcommand_is_validation_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_tailgap"))
        .args(["plot", "--config", "x.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "validation");
}

#[test]
fn seed_override_changes_monte_carlo_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"beta":{"a":2,"b":2},"pareto_tail":{"scale":1,"tail_index":2},"samples":2000}"#;
    let a = tailgap(dir.path(), &["propagate", "--seed", "1"], cfg);
    let b = tailgap(dir.path(), &["propagate", "--seed", "2"], cfg);
    let c = tailgap(dir.path(), &["propagate", "--seed", "1"], cfg);
    assert_ne!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}
