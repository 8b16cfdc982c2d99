mod common;

use std::path::Path;
use std::process::{Command, Output};

use traceforge::io::write_json;
use traceforge::report::{read_csv, AccuracyRow};

fn tf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_traceforge")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let o = tf(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_run_score_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = ok(&[
        "generate", "--out", s(&data), "--seed", "3", "--swirl-per-level", "3", "--circuit-wires", "5,6",
        "--condition-per-kind", "2",
    ]);
    assert!(out.contains("wrote"));
    let manifest = data.join("manifest.json");
    assert!(manifest.exists());

    let log = dir.path().join("oracle.jsonl");
    let glog = dir.path().join("greedy.jsonl");
    ok(&["run", "--manifest", s(&manifest), "--model", "builtin/oracle", "--runs", "2", "--out", s(&log)]);
    let again = ok(&["run", "--manifest", s(&manifest), "--model", "builtin/oracle", "--runs", "2", "--out", s(&log)]);
    assert!(again.starts_with("queried 0 "), "{again}");
    ok(&["run", "--manifest", s(&manifest), "--model", "builtin/greedy", "--runs", "1", "--out", s(&glog)]);

    let report = dir.path().join("report");
    let out = ok(&["score", "--manifest", s(&manifest), "--responses", s(&log), "--responses", s(&glog), "--out", s(&report)]);
    assert!(out.contains("builtin/oracle"));
    for f in ["scores.jsonl", "accuracy.csv", "prefix_accuracy.csv", "prefix_accuracy.svg", "summary.md"] {
        assert!(report.join(f).exists(), "{f}");
    }
    let rows: Vec<AccuracyRow> = read_csv(&report.join("accuracy.csv")).unwrap();
    let oracle: Vec<_> = rows.iter().filter(|r| r.model == "builtin/oracle").collect();
    assert!(!oracle.is_empty());
    assert!(oracle.iter().all(|r| r.mean == 100.0 && r.run_accuracies.split(';').count() == 2));

    let reasoning = dir.path().join("reasoning");
    ok(&["analyze-reasoning", "--responses", s(&log), "--manifest", s(&manifest), "--out", s(&reasoning)]);
    assert!(reasoning.join("reasoning.csv").exists());
}

#[test]
fn probe_margins_from_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let dumps = dir.path().join("dumps");
    std::fs::create_dir(&dumps).unwrap();
    let all: Vec<_> = (0..100).map(|s| common::distill(&common::random_raw_probe(s))).collect();
    let shape = |d: &traceforge_core::probes::RegionDump| (d.vision_blocks, d.llm_layers);
    for (i, d) in all.iter().filter(|d| shape(d) == shape(&all[0])).take(5).enumerate() {
        write_json(d, &dumps.join(format!("{i}.json"))).unwrap();
    }
    let out = dir.path().join("margins");
    ok(&["probe", "margins", "--dumps", s(&dumps), "--out", s(&out)]);
    assert!(out.join("margins.csv").exists());

    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert!(!tf(&["probe", "margins", "--dumps", s(&empty), "--out", s(&out)]).status.success());
}

#[test]
fn remote_model_needs_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    ok(&["generate", "--out", s(&data), "--swirl-per-level", "1", "--circuit-wires", "5", "--condition-per-kind", "1", "--no-masks"]);
    let o = tf(&["run", "--manifest", s(&data.join("manifest.json")), "--model", "some-vlm", "--out", s(&dir.path().join("l.jsonl"))]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--endpoint"));
}

#[test]
fn missing_response_log_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    ok(&["generate", "--out", s(&data), "--swirl-per-level", "1", "--circuit-wires", "5", "--condition-per-kind", "1"]);
    let o = tf(&[
        "score", "--manifest", s(&data.join("manifest.json")), "--responses", s(&dir.path().join("none.jsonl")), "--out",
        s(&dir.path().join("r")),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no such response log"));
}
