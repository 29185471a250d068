use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_align-distort"))
        .args(args)
        .current_dir(dir)
        .env("ALIGN_DISTORT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = cli(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of a CSV report as maps from column name to cell.
fn rows(csv_text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut lines = csv_text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    let body: String = lines.map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().clone();
    r.records().map(|rec| header.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()).collect()
}

#[test]
fn universal_lb_summary_reports_half_win_rates() {
    let dir = tempfile::tempdir().unwrap();
    let stdout =
        ok(dir.path(), &["gen", "universal-lb", "--m", "100", "--beta", "5", "--eps", "1e-3", "--xi", "1", "--out", "u"]);
    assert!(stdout.contains("all expected win-rates are 1/2"), "{stdout}");
    assert!(dir.path().join("u.instance.json").exists());
    let analytics: Value = serde_json::from_slice(&std::fs::read(dir.path().join("u.analytics.json")).unwrap()).unwrap();
    assert_eq!(analytics["schema_version"], 1);
    assert_eq!(analytics["config"]["m"], 100);
    let floor = analytics["analytics"]["ratio_floor"].as_f64().unwrap();
    assert!(floor > 2.0 && floor < 2.6, "{floor}");

    let rates = ok(dir.path(), &["winrates", "--instance", "u.instance.json"]);
    for row in rows(&rates) {
        let p: f64 = row["win_rate"].parse().unwrap();
        assert!((p - 0.5).abs() <= 1e-12);
    }
}

#[test]
fn rlhf_lb_rejects_large_beta_with_minimal_m() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(dir.path(), &["gen", "rlhf-lb", "--beta", "8"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    let msg = err["error"].as_str().unwrap();
    let m_min = (4.0 * 8f64.exp()).ceil() as usize + 2;
    assert!(msg.contains(&m_min.to_string()), "{msg}");
    assert!(!dir.path().join("rlhf-lb.instance.json").exists());
}

#[test]
fn unbounded_sequence_bars_decrease() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "unbounded-seq", "--beta", "5", "--m", "14", "--eps", "1e-3", "--out", "s"]);
    let text = std::fs::read_to_string(dir.path().join("s.sequence.csv")).unwrap();
    let utils: Vec<f64> = rows(&text).iter().map(|r| r["avg_util"].parse().unwrap()).collect();
    assert_eq!(utils.len(), 14);
    assert!(utils.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0), "{utils:?}");
}

#[test]
fn zero_budget_returns_reference_policy() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "borda-lb", "--beta", "5", "--out", "b"]);
    let text =
        ok(dir.path(), &["run", "--instance", "b.instance.json", "--method", "nlhf", "--tau", "0", "--pi-ref", "0.2,0.3,0.5"]);
    let row = &rows(&text)[0];
    let pi: Vec<f64> = row["policy"].split(' ').map(|v| v.parse().unwrap()).collect();
    assert_eq!(pi, [0.2, 0.3, 0.5]);
    let optimal: f64 = row["optimal_util"].parse().unwrap();
    let achieved: f64 = row["method_util"].parse().unwrap();
    let ratio: f64 = row["ratio"].parse().unwrap();
    assert_eq!(ratio, optimal / achieved);
    assert_eq!(ratio, 1.0);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "borda-lb", "--beta", "3", "--out", "b"]);
    let args = [
        "run",
        "--mode",
        "empirical",
        "--instance",
        "b.instance.json",
        "--n",
        "500",
        "--d",
        "2",
        "--trials",
        "4",
        "--seed",
        "11",
    ];
    let a = ok(dir.path(), &args);
    let b = cli(dir.path(), &args);
    assert_eq!(a.as_bytes(), b.stdout.as_slice());
    let serial = Command::new(env!("CARGO_BIN_EXE_align-distort"))
        .args(args)
        .current_dir(dir.path())
        .env("ALIGN_DISTORT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.as_bytes(), serial.stdout.as_slice());
    let other = ok(dir.path(), &[&args[..args.len() - 1], &["12"]].concat());
    assert_ne!(a, other);
}

#[test]
fn population_nlhf_within_bound() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "borda-lb", "--beta", "4", "--out", "b"]);
    let text = ok(dir.path(), &["run", "--instance", "b.instance.json", "--format", "json"]);
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["config"]["instance"], "b.instance.json");
    let results = doc["results"].as_array().unwrap();
    assert_eq!(results.len(), 4);
    let nlhf = results.iter().find(|r| r["method"] == "nlhf").unwrap();
    let ratio = nlhf["ratio"].as_f64().unwrap();
    assert!(ratio >= 1.0 - 1e-9 && ratio <= 4f64 / 2.0 / (2f64).tanh() + 1e-6, "{ratio}");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "borda-lb", "--beta", "5", "--out", "b"]);
    std::fs::write(dir.path().join("cfg.json"), r#"{"command": "policy", "instance": "b.instance.json", "method": "nlhf"}"#)
        .unwrap();
    let text = ok(dir.path(), &["policy", "--config", "cfg.json", "--method", "optimal"]);
    assert!(
        text.starts_with("# config: {\"command\":\"policy\",\"instance\":\"b.instance.json\",\"method\":\"optimal\"}"),
        "{text}"
    );
    let probs: Vec<f64> = rows(&text).iter().map(|r| r["probability"].parse().unwrap()).collect();
    assert!((probs[0] - 1.0).abs() < 1e-9, "{probs:?}");

    std::fs::write(dir.path().join("bad.json"), r#"{"instance": "b.instance.json", "colour": 1}"#).unwrap();
    let out = cli(dir.path(), &["run", "--config", "bad.json"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("colour"));

    let out = cli(dir.path(), &["run", "--config", "cfg.json"]);
    assert!(!out.status.success(), "config for `policy` must not run as `run`");
}

#[test]
fn solver_errors_are_structured() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "unbounded-seq", "--beta", "2", "--m", "5", "--out", "s"]);
    let out = cli(dir.path(), &["run", "--instance", "s.instance.json", "--method", "borda"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("Borda"), "{err}");
}

#[test]
fn bound_curves_need_no_instance() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(dir.path(), &["run", "--mode", "bound-curves", "--betas", "4.6,50"]);
    let r = rows(&text);
    let first: f64 = r[0]["nlhf_bound"].parse().unwrap();
    assert!((first - 2.34).abs() < 0.01);
    let lower_over_beta: f64 = r[1]["borda_lb_over_beta"].parse().unwrap();
    let upper_over_beta: f64 = r[1]["nlhf_bound_over_beta"].parse().unwrap();
    assert!(lower_over_beta > upper_over_beta);
}

#[test]
fn verify_sandwich_passes_and_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(dir.path(), &["verify", "sandwich", "--format", "json", "--seed", "3"]);
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["results"]["passed"], true);
    assert_eq!(doc["results"]["criteria"][0]["id"], 1);
}
