use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ndt(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ndt")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn eval_threshold() {
    let d = tempfile::tempdir().unwrap();
    let o = ndt(&["eval", "thr[p0 p1 p2; 2]", "--assign", "p0=1,p1=1"], d.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1");
    let o = ndt(&["eval", "thr[p0 p1 p2; 2]", "--assign", "p0=1"], d.path());
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn eval_rejects_bad_assignment() {
    let d = tempfile::tempdir().unwrap();
    let o = ndt(&["eval", "p0", "--assign", "q=1"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn php_writes_a_checkable_proof_and_stable_report() {
    let d = tempfile::tempdir().unwrap();
    let o = ndt(&["php", "--n", "1", "--out", "p.lndt", "--report", "a.json", "--no-timing"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    ndt(&["php", "--n", "1", "--out", "q.lndt", "--report", "b.json", "--no-timing"], d.path());
    let a = fs::read(d.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(d.path().join("b.json")).unwrap());
    assert_eq!(fs::read(d.path().join("p.lndt")).unwrap(), fs::read(d.path().join("q.lndt")).unwrap());

    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["schema"], "ndt-report/1");
    assert_eq!(v["n"], 1);
    assert_eq!(v["wall_ms"], 0);
    for key in ["lines", "tokens", "rule_histogram"] {
        assert!(v.get(key).is_some(), "report lacks {key}");
    }

    let o = ndt(&["check", "p.lndt", "--sound"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn check_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(ndt(&["check", "missing.lndt"], d.path()).status.code(), Some(2));

    fs::write(d.path().join("garbage.lndt"), "this is not a proof\n").unwrap();
    assert_eq!(ndt(&["check", "garbage.lndt"], d.path()).status.code(), Some(2));

    // Parses, but the weakening claims the wrong formula.
    fs::write(d.path().join("bad.lndt"), "dialect: eLNDT+\nL1: p0 |- p0 ; id[p0]\nL2: p0, p1 |- p0 ; wL[p2](L1)\n")
        .unwrap();
    let o = ndt(&["check", "bad.lndt"], d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("L2"), "diagnostic names the line");

    fs::write(d.path().join("good.lndt"), "dialect: eLNDT+\nL1: p0 |- p0 ; id[p0]\nL2: p0, p1 |- p0 ; wL[p1](L1)\n")
        .unwrap();
    assert_eq!(ndt(&["check", "good.lndt"], d.path()).status.code(), Some(0));
}

#[test]
fn oracle_cap_is_bounded() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("good.lndt"), "dialect: eLNDT+\nL1: p0 |- p0 ; id[p0]\n").unwrap();
    assert_eq!(ndt(&["check", "good.lndt", "--sound", "--oracle-cap", "25"], d.path()).status.code(), Some(2));
    assert_eq!(ndt(&["check", "good.lndt", "--sound", "--oracle-cap", "24"], d.path()).status.code(), Some(0));
}

#[test]
fn simulate_a_corpus_proof() {
    let d = tempfile::tempdir().unwrap();
    assert!(ndt(&["corpus", "--seed", "5", "--count", "2", "--out-dir", "c"], d.path()).status.success());
    let o = ndt(
        &["simulate", "--in", "c/proof-001.lndt", "--out", "s.lndt", "--report", "s.json", "--jobs", "2"],
        d.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(d.path().join("s.lndt")).unwrap();
    assert!(text.starts_with("dialect: eLNDT+\n"));
    assert!(ndt(&["check", "s.lndt"], d.path()).status.success());
    let v: serde_json::Value = serde_json::from_slice(&fs::read(d.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(v["command"], "simulate");
    assert!(v["stages"]["per_k"].is_array());
}

#[test]
fn bp_closure_of_exact_is_dot() {
    let d = tempfile::tempdir().unwrap();
    assert!(ndt(&["bp", "exact", "--n", "4", "--k", "2", "--out", "exact42.bp"], d.path()).status.success());
    let o = ndt(&["bp", "closure", "--in", "exact42.bp", "--dot", "c.dot"], d.path());
    assert!(o.status.success());
    let dot = fs::read_to_string(d.path().join("c.dot")).unwrap();
    assert!(dot.starts_with("digraph"));

    // The closure of "exactly 2 of 4" is "at least 2 of 4".
    for (assign, want) in [("p1=1,p2=1,p3=1", "1"), ("p4=1", "0"), ("p2=1,p4=1", "1")] {
        let o = ndt(&["bp", "closure", "--in", "exact42.bp", "--out", "t.bp"], d.path());
        assert!(o.status.success());
        let o = ndt(&["bp", "eval", "--in", "t.bp", "--assign", assign], d.path());
        assert_eq!(stdout(&o).trim(), want, "{assign}");
    }
}

#[test]
fn scaling_identity_and_empty_range() {
    let d = tempfile::tempdir().unwrap();
    let o = ndt(&["scaling", "identity", "--from", "1", "--to", "10", "--format", "json"], d.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
    assert!(v["slope"].as_f64().unwrap() < 3.5);

    assert_eq!(ndt(&["scaling", "php", "--from", "4", "--to", "2"], d.path()).status.code(), Some(2));

    let o = ndt(&["scaling", "merge", "--from", "2", "--to", "5", "--jobs", "3", "--no-timing"], d.path());
    let csv = stdout(&o);
    assert!(csv.starts_with("n,lines,tokens,wall_ms\n"));
    assert!(csv.contains("# slope"));
}

#[test]
fn search_proves_or_refutes() {
    let d = tempfile::tempdir().unwrap();
    let o = ndt(&["search", "p0, pdec(0, p1, p2) |- or(p0, p2)", "--out", "s.lndt"], d.path());
    assert!(o.status.success());
    assert!(ndt(&["check", "s.lndt", "--sound"], d.path()).status.success());
    assert_eq!(ndt(&["search", "p0 |- p1"], d.path()).status.code(), Some(1));
}
