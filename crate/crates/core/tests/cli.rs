mod common;

use std::path::Path;
use std::process::{Command, Output};

fn multirank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multirank")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn solve_ring_prints_four_normalized_rankings() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "ring.edges", common::RING);
    let out = multirank(&["solve", &net, "--config", "A0T A0 A1T A1", "--trace"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rankings = doc["rankings"].as_array().unwrap();
    assert_eq!(rankings.len(), 4);
    for r in rankings {
        let sum: f64 = r["scores"].as_array().unwrap().iter().map(|e| e["score"].as_f64().unwrap()).sum();
        assert!((sum - 1.0).abs() <= 1e-12);
    }
    assert!(doc["per_tau_trace"].as_array().unwrap().len() > 1);
}

#[test]
fn preset_matches_explicit_config() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "ring.edges", common::RING);
    let a = multirank(&["solve", &net, "--preset", "hits-like", "--format", "csv"]);
    let b = multirank(&["solve", &net, "--config", "A0T A0 A1T A1", "--format", "csv"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn vertex_ids_are_restored() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "ids.edges", "0 10 20 1\n0 20 30 1\n0 30 10 1\n");
    let out = multirank(&["solve", &net, "--config", "A0", "--format", "csv"]);
    let text = stdout(&out);
    let ids: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids, ["10", "20", "30"]);
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "ring.edges", common::RING);
    assert_eq!(multirank(&["solve", &net, "--config", "A5"]).status.code(), Some(3));
    let bad = write(dir.path(), "bad.edges", "0 1 1 -2.0\n");
    let out = multirank(&["solve", &bad, "--config", "A0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
    let capped = multirank(&["solve", &net, "--config", "A0T A0 A1T A1", "--max-halvings", "3"]);
    assert_eq!(capped.status.code(), Some(4));
}

#[test]
fn enumerate_listing_and_count() {
    assert_eq!(stdout(&multirank(&["enumerate", "--layers", "2", "--count"])).trim(), "24");
    assert_eq!(stdout(&multirank(&["enumerate", "--layers", "3", "--count"])).trim(), "415");
    assert_eq!(stdout(&multirank(&["enumerate", "--layers", "1"])).lines().count(), 3);
    let four = stdout(&multirank(&["enumerate", "--layers", "2", "--k", "4"]));
    assert_eq!(four.lines().count(), 6);
    assert!(four.lines().all(|l| l.ends_with("\t4")));
}

#[test]
fn cost_table_first_row() {
    let text = stdout(&multirank(&["cost-table"]));
    assert_eq!(text.lines().nth(1).unwrap(), "64,8192,266240,532480,790528,524288,266240");
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn generate_then_measure() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("g.edges").display().to_string();
    let gen = multirank(&["generate", "--generator", "sbm", "--n", "40", "--layer-p", "1", "--seed", "4", "--output", &net]);
    assert!(gen.status.success());
    let mj: serde_json::Value = serde_json::from_str(&stdout(&multirank(&["measure", "multijaccard", &net]))).unwrap();
    assert_eq!(mj["multijaccard"].as_f64(), Some(1.0));
    let ring = write(dir.path(), "ring.edges", common::RING);
    let check: serde_json::Value = serde_json::from_str(&stdout(&multirank(&["measure", "check", &ring]))).unwrap();
    assert_eq!(check["period"].as_u64(), Some(6));
}

#[test]
fn measure_tau_and_ci() {
    let dir = tempfile::tempdir().unwrap();
    let r = write(dir.path(), "r.txt", "3\n2\n1\n0\n");
    let s = write(dir.path(), "s.txt", "3\n2\n0\n1\n");
    let tau: serde_json::Value = serde_json::from_str(&stdout(&multirank(&["measure", "tau", &r, &s]))).unwrap();
    assert!((tau["tau_w"].as_f64().unwrap() - 0.8133333333333334).abs() <= 1e-12);
    let ci: serde_json::Value = serde_json::from_str(&stdout(&multirank(&["measure", "ci", &r]))).unwrap();
    assert_eq!(ci["mean"].as_f64(), Some(1.5));
}

#[test]
fn experiment_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let status = multirank(&[
        "experiment", "--batch", "compare-methods", "--n", "16", "--repetitions", "2", "--p-step", "0.5",
        "--deterministic", "--output", &out.display().to_string(),
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("generator,n,layers,p,repetition,multijaccard,comparison,config,shift,tau_w,status\n"));
    // 2 generators x 3 p values x 2 repetitions x 3 method pairs.
    assert_eq!(csv.lines().count(), 1 + 36);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(summary["rows"].as_u64(), Some(36));
    assert!(summary.get("generated_at").is_none());

    let stamped = multirank(&["experiment", "--batch", "cost-table"]);
    assert!(stdout(&stamped).starts_with("# multirank"));
}
