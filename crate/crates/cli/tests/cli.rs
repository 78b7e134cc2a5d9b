//! End-to-end runs of the command-line tool on the bundled fixtures.

use std::path::PathBuf;
use std::process::{Command, Output};

use sblearn::{Label, Piecewise, SymbolicAutomaton};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn sblearn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sblearn")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn learns_the_four_piece_example() {
    let path = fixture("gamma1.json");
    let target: Piecewise<Label> = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for strategy in ["simplest", "boundary", "deep:10000", "random:7"] {
        let out = sblearn(&["learn-pwf", path.to_str().unwrap(), "--strategy", strategy]);
        assert_eq!(out.status.code(), Some(0), "{strategy}");
        let v = json(&out);
        assert_eq!(v["verified"], true);
        let learned: Piecewise<Label> = serde_json::from_value(v["report"]["result"].clone()).unwrap();
        assert_eq!(learned, target);
        assert_eq!(
            format!("{learned:?}"),
            "((-inf, -2/3), B)([-2/3, 1/2], A)((1/2, 3/2], B)((3/2, inf), A)"
        );
    }
}

#[test]
fn constant_target_needs_one_query_of_each_kind() {
    let out = sblearn(&["learn-pwf", fixture("constant.json").to_str().unwrap(), "--verbose"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["mq_count"], 1);
    assert_eq!(v["report"]["eq_count"], 1);
    assert_eq!(v["report"]["result"]["pieces"].as_array().unwrap().len(), 1);
    assert_eq!(v["transcript"].as_array().unwrap().len(), 2);
}

#[test]
fn random_targets_are_reproducible() {
    for cmd in ["learn-pwf", "learn-sfa"] {
        let a = sblearn(&[cmd, "--random", "--seed", "42"]);
        let b = sblearn(&[cmd, "--random", "--seed", "42"]);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(json(&a)["verified"], true);
    }
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"pieces\": [").unwrap();
    let out = sblearn(&["learn-pwf", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    // pieces out of order
    std::fs::write(
        &bad,
        r#"{"pieces":[
            {"lo":{"num":"0","den":"1"},"hi":{"num":"1","den":"0"},"lo_closed":false,"hi_closed":false,"label":"A"},
            {"lo":{"num":"-1","den":"0"},"hi":{"num":"0","den":"1"},"lo_closed":false,"hi_closed":true,"label":"B"}]}"#,
    )
    .unwrap();
    assert_eq!(sblearn(&["learn-pwf", bad.to_str().unwrap()]).status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    assert_eq!(sblearn(&["learn-sfa", missing.to_str().unwrap()]).status.code(), Some(2));
    let sfa = fixture("fig1-2.json");
    assert_eq!(sblearn(&["run", sfa.to_str().unwrap(), "7 inf"]).status.code(), Some(2));
    assert_eq!(sblearn(&["run", sfa.to_str().unwrap(), "7 x"]).status.code(), Some(2));
}

#[test]
fn runs_the_two_automata() {
    let out = sblearn(&["run", fixture("fig1-2.json").to_str().unwrap(), "7 14"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "accept\ns0 -> s1 -> s2\n");

    let out = sblearn(&["run", fixture("fig1-1.json").to_str().unwrap(), "48 48"]);
    assert_eq!(stdout(&out), "reject\ns0 -> s0 -> s0\n");
    let out = sblearn(&["run", fixture("fig1-1.json").to_str().unwrap(), "72 105"]);
    assert_eq!(stdout(&out), "accept\ns0 -> s1 -> s2\n");
    let out = sblearn(&["run", fixture("fig1-2.json").to_str().unwrap(), ""]);
    assert_eq!(stdout(&out), "reject\ns0\n");
}

#[test]
fn exports_dot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig.dot");
    let out = sblearn(&["export-dot", fixture("fig1-2.json").to_str().unwrap(), "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let dot = std::fs::read_to_string(&path).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("\"s0\" -> \"s1\" [label=\"13/2 < x <= 23/3\"]"));
    assert!(dot.contains("\"s2\" [shape=doublecircle]"));
}

#[test]
fn learns_both_automata() {
    for name in ["fig1-1.json", "fig1-2.json"] {
        let path = fixture(name);
        let target: SymbolicAutomaton = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let out = sblearn(&["learn-sfa", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let v = json(&out);
        assert_eq!(v["verified"], true);
        let learned: SymbolicAutomaton = serde_json::from_value(v["report"]["result"].clone()).unwrap();
        assert!(learned.equivalent(&target));
        assert_eq!(learned.num_states(), target.num_states());
    }
}

#[test]
fn bench_is_deterministic() {
    let args = ["bench", "--pieces", "2..8", "--bits", "4..8", "--reps", "2", "--seed", "9"];
    let a = sblearn(&args);
    let b = sblearn(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("pieces,bits,seed,strategy,size,break_links,mq_count,eq_count"));
    // pieces {2, 4, 8} x bits {4, 8} x 2 repetitions
    assert_eq!(lines.count(), 12);

    let out = sblearn(&["bench", "--pieces", "2..4", "--bits", "4..4", "--reps", "1", "--format", "json"]);
    let v = json(&out);
    assert_eq!(v["records"].as_array().unwrap().len(), 2);
    assert_eq!(v["summary"]["eq_within_break_links"], true);
}

#[test]
fn output_artifacts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pwf_out = dir.path().join("pwf.json");
    let sfa_out = dir.path().join("sfa.json");
    let status = sblearn(&["learn-pwf", fixture("gamma1.json").to_str().unwrap(), "--out", pwf_out.to_str().unwrap()]).status;
    assert_eq!(status.code(), Some(0));
    let status = sblearn(&["learn-sfa", fixture("fig1-1.json").to_str().unwrap(), "--out", sfa_out.to_str().unwrap()]).status;
    assert_eq!(status.code(), Some(0));

    let v: Value = serde_json::from_str(&std::fs::read_to_string(&pwf_out).unwrap()).unwrap();
    let learned: Piecewise<Label> = serde_json::from_value(v["report"]["result"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&learned).unwrap(), v["report"]["result"]);

    let v: Value = serde_json::from_str(&std::fs::read_to_string(&sfa_out).unwrap()).unwrap();
    let learned: SymbolicAutomaton = serde_json::from_value(v["report"]["result"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&learned).unwrap(), v["report"]["result"]);

    // a learned automaton is itself a valid input
    let again = dir.path().join("learned.json");
    std::fs::write(&again, serde_json::to_string(&learned).unwrap()).unwrap();
    let out = sblearn(&["run", again.to_str().unwrap(), "72 105"]);
    assert_eq!(stdout(&out).lines().next(), Some("accept"));
}

#[test]
fn fixtures_are_canonical() {
    for name in ["gamma1.json", "constant.json"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let t: Piecewise<Label> = serde_json::from_str(&text).unwrap();
        assert_eq!(t, t.canonicalize(), "{name}");
    }
}
