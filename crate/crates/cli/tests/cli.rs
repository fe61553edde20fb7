//! Runs the built `ptpn` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn ptpn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptpn")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name].iter().collect();
    p.to_str().unwrap().to_string()
}

fn schema_validator() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn check_json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["check", "--format", "json"];
    full.extend_from_slice(args);
    let out = ptpn(&full);
    let report: Value = serde_json::from_slice(&out.stdout).expect("JSON on stdout");
    let validator = schema_validator();
    let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}\n{report:#}");
    (code(&out), report)
}

#[test]
fn single_supplier_succeeds() {
    let (code, report) = check_json(&["--suppliers", "1", "--managers", "1", "--y", "6"]);
    assert_eq!(code, 0);
    assert_eq!(report["verdict"], "Success");
    assert_eq!(report["witness"], Value::Null);
}

#[test]
fn two_suppliers_one_manager_timelocks_with_trace() {
    let (code, report) = check_json(&["--suppliers", "2", "--managers", "1", "--y", "6"]);
    assert_eq!(code, 3);
    assert_eq!(report["verdict"], "TimeLock");
    let witness = report["witness"].as_array().unwrap();
    assert!(!witness.is_empty());
    assert_eq!(witness[0]["source"], 0);
    for pair in witness.windows(2) {
        assert_eq!(pair[0]["target"], pair[1]["source"]);
    }
}

#[test]
fn late_grant_times_out() {
    let (code, report) = check_json(&["--suppliers", "1", "--managers", "1", "--y", "180"]);
    assert_eq!(code, 2);
    assert_eq!(report["verdict"], "TimeOut");
    let last = report["witness"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["label"], "timeout");
}

#[test]
fn text_report_lists_stats_and_trace() {
    let out = ptpn(&["check", "--suppliers", "2"]);
    assert_eq!(code(&out), 3);
    let text = stdout(&out);
    assert!(text.contains("verdict: TimeLock"), "{text}");
    assert!(text.contains("classes: ") && text.contains("transitions: "));
    assert!(text.contains("witness ("));
}

#[test]
fn class_limit_gives_partial_report() {
    let (exit, report) = check_json(&["--suppliers", "2", "--limit-classes", "50"]);
    assert_eq!(exit, 5);
    assert_eq!(report["verdict"], "Partial");
    assert_eq!(report["limit"], "max_classes");
    let out = ptpn(&["explore", "--suppliers", "2", "--limit-classes", "50"]);
    assert_eq!(code(&out), 5);
    assert!(stdout(&out).contains("partial"));
}

#[test]
fn fixture_manifest_timelocks_with_accepting_predicate() {
    let (code, report) = check_json(&[&fixture("timelock.manifest"), "--accept", "p2>=1,q2>=1"]);
    assert_eq!(code, 3);
    let labels: Vec<&Value> = report["witness"].as_array().unwrap().iter().map(|s| &s["label"]).collect();
    assert_eq!(labels, [&Value::from("a"), &Value::Null]);
    // every dead class accepted: nothing left to classify
    let (code, report) = check_json(&[&fixture("timelock.manifest")]);
    assert_eq!(code, 4);
    assert_eq!(report["verdict"], "Inconclusive");
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&ptpn(&["check", "--bogus"])), 64);
    assert_eq!(code(&ptpn(&["frobnicate"])), 64);
    assert_eq!(code(&ptpn(&["sweep", "--suppliers", "1", "--managers", "1"])), 64);
    assert_eq!(code(&ptpn(&["sweep", "--grid", "bogus"])), 64);
    assert_eq!(code(&ptpn(&["check", "--accept", "p>>1"])), 64);
    assert_eq!(code(&ptpn(&["--help"])), 0);
}

#[test]
fn parse_errors_carry_file_and_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.net");
    std::fs::write(&bad, "pl p (1)\ntr t [4,2] p -> p\n").unwrap();
    let out = ptpn(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.net:2:"), "{err}");
}

#[test]
fn missing_manifest_component_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.manifest");
    std::fs::write(&m, "component absent.net\n").unwrap();
    let out = ptpn(&["validate", m.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("absent.net") && err.contains("cannot read"), "{err}");
}

#[test]
fn sweep_csv_is_deterministic_and_has_no_timing() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = ptpn(&[
            "sweep",
            "--suppliers",
            "1,2",
            "--managers",
            "1,2",
            "--y",
            "6,180",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        std::fs::read(path).unwrap()
    };
    let first = run("a.csv");
    assert_eq!(first, run("b.csv"));
    let text = String::from_utf8(first).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "suppliers,managers,y,staggered,verdict,classes,markings,domains,transitions");
    let verdicts: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(4).unwrap()).collect();
    // columns (1,1), (2,1), (2,2) by y = 6, 180
    assert_eq!(verdicts, ["Success", "TimeOut", "TimeLock", "TimeOut", "Success", "TimeOut"]);
}

#[test]
fn staggered_sweep_rows() {
    let out = ptpn(&["sweep", "--suppliers", "2", "--managers", "1", "--y", "50,175", "--staggered"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("2,1,50,true,Success,"), "{text}");
    assert!(text.contains("2,1,175,true,TimeOut,"), "{text}");
}

#[test]
fn aut_export_round_trips_edge_count() {
    let out = ptpn(&["export", &fixture("timelock.manifest"), "--format", "aut"]);
    assert_eq!(code(&out), 0);
    let aut = ptpn::export::parse_aut(&stdout(&out)).unwrap();
    let explore = ptpn(&["explore", &fixture("timelock.manifest"), "--format", "json"]);
    let report: Value = serde_json::from_slice(&explore.stdout).unwrap();
    assert_eq!(aut.edges.len() as u64, report["stats"]["transitions"].as_u64().unwrap());
    assert_eq!(aut.states as u64, report["stats"]["classes"].as_u64().unwrap());
    assert_eq!(stdout(&out), stdout(&ptpn(&["export", &fixture("timelock.manifest"), "--format", "aut"])));
}

#[test]
fn dot_export_shows_dead_nodes() {
    let out = ptpn(&["export", &fixture("timelock.manifest"), "--format", "dot"]);
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("doubleoctagon").count(), 2);
}

#[test]
fn parallel_exploration_matches_sequential() {
    let seq = ptpn(&["export", "--suppliers", "2", "--format", "aut"]);
    let par = ptpn(&["export", "--suppliers", "2", "--format", "aut", "--parallel"]);
    assert_eq!(code(&par), 0);
    assert_eq!(seq.stdout, par.stdout);
}

#[test]
fn generate_then_check_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let out = ptpn(&["generate", "--suppliers", "2", "--managers", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let manifest = dir.path().join("chain.manifest");
    assert!(manifest.exists());
    let (from_files, report) = check_json(&[manifest.to_str().unwrap()]);
    assert_eq!(from_files, 0);
    assert_eq!(report["spec"]["success_label"], "success");
    let (_, builtin) = check_json(&["--suppliers", "2", "--managers", "2"]);
    assert_eq!(report["stats"], builtin["stats"]);
}

#[test]
fn compose_writes_a_parseable_product() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("product.net");
    let out = ptpn(&["compose", &fixture("timelock.manifest"), "--out", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let composed = ptpn::parse_net(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let expected = ptpn::parse_net(&std::fs::read_to_string(fixture("timelock_product.net")).unwrap()).unwrap();
    assert_eq!(composed, expected);
}
