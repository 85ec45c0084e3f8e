use std::path::PathBuf;
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn adctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adctl"))
        .args(args)
        .env("ADCTL_CONFIG_DIR", configs())
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn racing_run_succeeds_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("racing.jsonl");
    let o = adctl(&["run", "racing", "--seed", "4", "--trace", trace.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.lines().next().unwrap().contains("\"format\":\"adctl-trace\""));
    assert!(text.lines().count() > 100);
}

#[test]
fn lethal_boat_start_exits_one_with_strike_in_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("boat.jsonl");
    let o = adctl(&["run", "boat_lethal.toml", "--trace", trace.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text
        .lines()
        .any(|l| l.contains("\"kind\":\"violation\"") && l.contains("island-strike")));
}

#[test]
fn malformed_and_invalid_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.toml");
    std::fs::write(&broken, "kind = [").unwrap();
    assert_eq!(code(&adctl(&["run", broken.to_str().unwrap()])), 2);
    let unordered = dir.path().join("unordered.toml");
    std::fs::write(&unordered, "kind = \"racing\"\n[racing]\nk3 = 1180.0\n").unwrap();
    let o = adctl(&["run", unordered.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("k3"));
    assert_eq!(code(&adctl(&["run", "no-such-scenario"])), 2);
}

#[test]
fn explicit_config_dir_flag_overrides_env() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("mine.toml"), "kind = \"toy\"\n").unwrap();
    let o = adctl(&["--config-dir", dir.path().to_str().unwrap(), "run", "mine"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn verify_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let dot = dir.path().join("graph.dot");
    let o = adctl(&[
        "verify",
        "racing",
        "--report",
        report.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["result"]["verified"], true);
    assert_eq!(r["graph"]["vertices"].as_array().unwrap().len(), 11);
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));

    let o = adctl(&["verify", "racing_no_ben2", "--report", report.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["result"]["counterexample"]["kind"], "dead-end");

    assert_eq!(code(&adctl(&["verify", "fig8"])), 0);
}

#[test]
fn lee_verdicts_and_usage_error() {
    let o = adctl(&["lee", "toy_static"]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["verdict"], true);
    assert_eq!(r["eta"], 0.2);

    // ε·e^λ ≈ 0.2718 for ẋ = x with ε = 0.1, λ = 1
    let o = adctl(&["lee", "toy_exp", "--eta", "0.15"]);
    assert_eq!(code(&o), 1);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r["eta_observed"].as_f64().unwrap() > 0.15);
    assert_eq!(code(&adctl(&["lee", "toy_exp", "--eta", "0.28"])), 0);

    assert_eq!(code(&adctl(&["lee", "toy_exp", "--samples", "0"])), 2);
    assert_eq!(code(&adctl(&["lee", "toy_exp", "--mode", "warp"])), 2);
}

#[test]
fn trace_export_columns() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let csv_path = dir.path().join("t.csv");
    assert_eq!(code(&adctl(&["run", "racing", "--horizon", "20", "--trace", trace.to_str().unwrap()])), 1);
    let o = adctl(&["trace-export", trace.to_str().unwrap(), "--out", csv_path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let mut rd = csv::Reader::from_path(&csv_path).unwrap();
    let head: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(head, ["sim_time", "agent", "x1", "v1", "x2", "v2", "mode", "triple"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 200);
    assert!(rows.iter().any(|r| &r[1] == "car2" && &r[7] == "(Str,1)"));
    let times: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn same_seed_same_exit_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for p in [&a, &b] {
        assert_eq!(code(&adctl(&["run", "boat", "--seed", "9", "--trace", p.to_str().unwrap()])), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
