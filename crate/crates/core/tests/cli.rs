use std::path::Path;
use std::process::Command;

use davies::exactnum::Rational;
use serde_json::Value;

struct Run {
    code: i32,
    report: Option<Value>,
    stderr: String,
}

fn davies(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_davies"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    let run = Run {
        code: out.status.code().unwrap(),
        report: serde_json::from_slice(&out.stdout).ok(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    };
    if let Some(r) = &run.report {
        assert_consistent(r, run.code);
    }
    run
}

/// Exit status 0 exactly when every check passed.
fn assert_consistent(report: &Value, code: i32) {
    let all = report["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true);
    assert_eq!(all, code == 0, "{report:#}");
    assert_eq!(report["verdict"] == "pass", all);
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn bare_points(dir: &Path, name: &str, n: usize) {
    let labels: Vec<String> = (0..n).map(|k| format!("{{\"label\":\"p{k}\"}}")).collect();
    write(dir, name, &format!("[{}]", labels.join(",")));
}

fn rat(v: &Value) -> Rational {
    v.as_str().unwrap().parse().unwrap()
}

#[test]
fn build_single_point_table() {
    let dir = tempfile::tempdir().unwrap();
    bare_points(dir.path(), "one.json", 1);
    write(dir.path(), "five.csv", "5/1\n");
    let run = davies(dir.path(), &["build", "--points", "one.json", "--function", "table:five.csv", "--out", "rep.json", "--verify"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.report.unwrap()["result"]["cutoffs"][0][0], 4);

    let file: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("rep.json")).unwrap()).unwrap();
    let values = |r: usize, n: usize| -> Vec<String> {
        file["rows"][r]["values"].as_array().unwrap()[..n].iter().map(|v| v.as_str().unwrap().to_string()).collect()
    };
    assert_eq!(values(0, 7), ["1", "1", "0", "1", "0", "0", "1"]);
    assert_eq!(values(1, 5), ["5", "0", "0", "0", "1"]);
    assert!(run.stderr.contains("build: pass"));
}

#[test]
fn build_zero_function() {
    let dir = tempfile::tempdir().unwrap();
    bare_points(dir.path(), "pts.json", 5);
    let run = davies(dir.path(), &["build", "--points", "pts.json", "--function", "zero", "--out", "z.json", "--verify"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let verify = davies(dir.path(), &["verify", "z.json"]);
    assert_eq!(verify.code, 0);
    let lb = davies(dir.path(), &["lowerbound", "z.json"]);
    assert_eq!(lb.code, 0);
    assert_eq!(lb.report.unwrap()["result"]["grid_rank"], 0);
}

#[test]
fn duplicate_labels_fail() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "dup.json", r#"[{"label":"a","payload":"1"},{"label":"a","payload":"2"}]"#);
    let run = davies(dir.path(), &["build", "--points", "dup.json", "--function", "product", "--out", "d.json"]);
    assert_ne!(run.code, 0);
    assert!(run.stderr.contains("duplicate"), "{}", run.stderr);
    assert!(!dir.path().join("d.json").exists());
}

#[test]
fn verify_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "pts.json", r#"[{"label":"a","payload":"2"},{"label":"b","payload":"-1/3"},{"label":"c","payload":"7"}]"#);
    let run = davies(dir.path(), &["build", "--points", "pts.json", "--function", "product", "--out", "rep.json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(davies(dir.path(), &["verify", "rep.json"]).code, 0);

    let mut file: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("rep.json")).unwrap()).unwrap();
    let v = &mut file["rows"][3]["values"][0];
    let changed = rat(v) + Rational::one();
    *v = Value::String(changed.to_string());
    write(dir.path(), "bad.json", &serde_json::to_string_pretty(&file).unwrap());
    let bad = davies(dir.path(), &["verify", "bad.json"]);
    assert_eq!(bad.code, 1);
    let report = bad.report.unwrap();
    assert!(report["checks"][0]["detail"].as_str().unwrap().contains("pair identities"), "{report:#}");

    let far = davies(dir.path(), &["verify", "rep.json", "--horizon", "100000000"]);
    assert_eq!(far.code, 1);
}

#[test]
fn empty_representation() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "none.json", "[]");
    assert_eq!(davies(dir.path(), &["build", "--points", "none.json", "--function", "zero", "--out", "e.json", "--verify"]).code, 0);
    assert_eq!(davies(dir.path(), &["verify", "e.json"]).code, 0);
}

#[test]
fn rank_certify() {
    let dir = tempfile::tempdir().unwrap();
    let one = davies(dir.path(), &["rank-certify", "--a", "0", "--b", "0"]);
    assert_eq!(one.code, 0);
    let r = one.report.unwrap();
    assert_eq!(r["result"]["verdict"], "NonsingularCertified");
    assert_eq!(r["result"]["enclosure"]["lo"], "1");

    let two = davies(dir.path(), &["rank-certify", "--a", "0,1", "--b", "0,1"]);
    assert_eq!(two.code, 0);
    let enc = &two.report.unwrap()["result"]["enclosure"];
    let (lo, hi) = (rat(&enc["lo"]), rat(&enc["hi"]));
    assert!(lo > "171/100".parse::<Rational>().unwrap() && hi < "172/100".parse::<Rational>().unwrap());

    let neg = davies(dir.path(), &["rank-certify", "--a", "-1,1/2,3", "--b", "-2,0,5/4", "--eps", "1/1024"]);
    assert_eq!(neg.code, 0, "{}", neg.stderr);

    let dup = davies(dir.path(), &["rank-certify", "--a", "0,0", "--b", "0,1"]);
    assert_eq!(dup.code, 2);
    assert!(dup.report.is_none());
    assert!(dup.stderr.contains("duplicate"));

    let starved = davies(dir.path(), &["rank-certify", "--a", "0,1/16", "--b", "0,1/16", "--eps", "100", "--max-refine", "0"]);
    assert_eq!(starved.code, 1);
    assert_eq!(starved.report.unwrap()["result"]["verdict"], "Indeterminate");
}

#[test]
fn reports_are_stable_apart_from_timings() {
    let dir = tempfile::tempdir().unwrap();
    let strip = |run: Run| {
        let mut r = run.report.unwrap();
        r.as_object_mut().unwrap().remove("timings_ms");
        r
    };
    let a = strip(davies(dir.path(), &["rank-certify", "--a", "0,1,2", "--b", "1,2,3"]));
    let b = strip(davies(dir.path(), &["rank-certify", "--a", "0,1,2", "--b", "1,2,3"]));
    assert_eq!(a, b);
    let c = strip(davies(dir.path(), &["rank-certify", "--a", "0,1,2", "--b", "1,2,4"]));
    assert_ne!(a["inputs_digest"], c["inputs_digest"]);
}

#[test]
fn lowerbound_blocks() {
    let dir = tempfile::tempdir().unwrap();
    bare_points(dir.path(), "pts.json", 5);
    assert_eq!(davies(dir.path(), &["build", "--points", "pts.json", "--function", "randtable:9:5", "--out", "r.json"]).code, 0);
    let full = davies(dir.path(), &["lowerbound", "r.json"]).report.unwrap();
    assert_eq!(full["result"]["grid_rank"], 5);
    assert!(full["result"]["active_indices"].as_u64().unwrap() >= 5);
    let block = davies(dir.path(), &["lowerbound", "r.json", "--rows", "0,1", "--cols", "4"]);
    assert_eq!(block.code, 0);
    assert_eq!(block.report.unwrap()["result"]["grid_rank"], 1);
    assert_eq!(davies(dir.path(), &["lowerbound", "r.json", "--rows", "7"]).code, 2);
}

#[test]
fn table_must_cover_points() {
    let dir = tempfile::tempdir().unwrap();
    bare_points(dir.path(), "pts.json", 3);
    write(dir.path(), "t.csv", "1,2\n3,4\n");
    assert_eq!(davies(dir.path(), &["build", "--points", "pts.json", "--function", "table:t.csv", "--out", "o.json"]).code, 2);
    assert_eq!(davies(dir.path(), &["build", "--points", "pts.json", "--function", "randtable:1:2", "--out", "o.json"]).code, 2);
    assert_eq!(davies(dir.path(), &["build", "--points", "pts.json", "--function", "nope", "--out", "o.json"]).code, 2);
}

fn growth(dir: &Path, function: &str, sizes: &str) -> Vec<(u64, u64)> {
    let run = davies(dir, &["demo-growth", "--sizes", sizes, "--function", function, "--out", "g.json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("g.json")).unwrap()).unwrap();
    assert_consistent(&report, run.code);
    report["result"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["active_indices"].as_u64().unwrap(), r["grid_rank"].as_u64().unwrap()))
        .collect()
}

#[test]
fn demo_growth() {
    let dir = tempfile::tempdir().unwrap();
    let zero = growth(dir.path(), "zero", "1..4");
    assert!(zero.iter().all(|&(_, rank)| rank == 0));

    let rand = growth(dir.path(), "randtable:11:6", "1..6");
    for (m, &(active, rank)) in (1u64..).zip(&rand) {
        assert_eq!(rank, m);
        assert!(active >= m);
    }

    let series = growth(dir.path(), "expseries:8", "1..6");
    assert!(series.windows(2).all(|w| w[0].1 <= w[1].1));
    assert!(series.iter().all(|&(a, r)| a >= r));

    let e0 = growth(dir.path(), "e0", "1..5");
    assert_eq!(e0.iter().map(|&(_, r)| r).collect::<Vec<_>>(), [1, 2, 2, 2, 2]);

    assert_eq!(davies(dir.path(), &["demo-growth", "--sizes", "1..20", "--function", "zero", "--out", "g.json"]).code, 2);
}

#[test]
fn help_and_usage() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(davies(dir.path(), &["--help"]).code, 0);
    assert_eq!(davies(dir.path(), &["build"]).code, 2);
    assert_eq!(davies(dir.path(), &["rank-certify", "--a", "x", "--b", "1"]).code, 2);
}
