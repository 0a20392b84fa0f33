use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bfnlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfnlab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("BFNLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn bfnlab_workers(args: &[&str], cwd: &Path, workers: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfnlab"))
        .args(args)
        .current_dir(cwd)
        .env("BFNLAB_WORKERS", workers)
        .output()
        .expect("binary runs")
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_record(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

#[test]
fn star_branching_factor() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("star.json"),
        r#"{"n": 8, "edges": [[0,1],[0,2],[0,3],[0,4],[0,5],[0,6],[0,7]]}"#,
    )
    .unwrap();
    let out = bfnlab(&["bf", "--hypergraph", "star.json"], dir.path());
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "7");
}

#[test]
fn malformed_input_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"n\": 2,").unwrap();
    let out = bfnlab(
        &["approximate", "--input", "bad.json", "--p", "0.1", "--degree", "2", "--seed", "1", "--out", "g.json", "--report", "r.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_record(&out)["error"], "malformed_input");
    assert!(!dir.path().join("g.json").exists());
    assert!(!dir.path().join("r.json").exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = bfnlab(&["approximate", "--p", "0.1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = bfnlab(&["bf", "--hypergraph", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_failure_exits_3_with_record() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("f.json"),
        r#"{"n": 2, "repr": "truth_table", "values": [0, 0.4, 0.7, 1]}"#,
    )
    .unwrap();
    let out = bfnlab(
        &["oracle", "--input", "f.json", "--degree", "2", "--budget", "1", "--out", "g.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let rec = stderr_record(&out);
    assert_eq!(rec["error"], "budget");
    assert_eq!(rec["exit_code"], 3);
    assert!(!dir.path().join("g.json").exists());
}

#[test]
fn corpus_is_deterministic() {
    let dir = TempDir::new().unwrap();
    for name in ["a", "b"] {
        let out = bfnlab(
            &["gen-corpus", "--kind", "planted-sparse-junta", "--size", "3", "--seed", "1", "--out-dir", name],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let mut names: Vec<_> = std::fs::read_dir(dir.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for n in names {
        let a = std::fs::read(dir.path().join("a").join(&n)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(&n)).unwrap();
        assert_eq!(a, b, "{n:?}");
    }
    let again = bfnlab(
        &["gen-corpus", "--kind", "planted-sparse-junta", "--size", "1", "--seed", "1", "--out-dir", "a"],
        dir.path(),
    );
    assert_eq!(again.status.code(), Some(2));
}

#[test]
fn zero_noise_instance_equals_truth() {
    let dir = TempDir::new().unwrap();
    let out = bfnlab(
        &["gen-corpus", "--kind", "perturbed-junta", "--size", "2", "--noise", "0", "--seed", "4", "--values", "-1,0,1", "--out-dir", "c"],
        dir.path(),
    );
    assert!(out.status.success());
    for i in 0..2 {
        let f = json_file(&dir.path().join(format!("c/instance-{i:04}.json")));
        let truth = json_file(&dir.path().join(format!("c/instance-{i:04}.truth.json")));
        assert_eq!(f, truth["truth"]);
    }
}

#[test]
fn hypergraph_corpus_respects_target() {
    let dir = TempDir::new().unwrap();
    let out = bfnlab(
        &["gen-corpus", "--kind", "random-bf-hypergraph", "--size", "4", "--rho", "5", "--n", "12", "--seed", "2", "--out-dir", "h"],
        dir.path(),
    );
    assert!(out.status.success());
    for i in 0..4 {
        let path = format!("h/instance-{i:04}.json");
        let bf: f64 = String::from_utf8(bfnlab(&["bf", "--hypergraph", &path], dir.path()).stdout)
            .unwrap()
            .trim()
            .parse()
            .unwrap();
        assert!(bf <= 5.0 + 1e-12);
    }
}

#[test]
fn approximate_recovers_planted_instance_reproducibly() {
    let dir = TempDir::new().unwrap();
    let out = bfnlab(
        &["gen-corpus", "--kind", "planted-sparse-junta", "--size", "1", "--seed", "9", "--out-dir", "c"],
        dir.path(),
    );
    assert!(out.status.success());
    let args = |g: &'static str, r: &'static str| {
        vec![
            "approximate", "--input", "c/instance-0000.json", "--p", "0.1", "--degree", "2", "--seed", "5",
            "--samples", "500", "--out", g, "--report", r, "--truth", "c/instance-0000.truth.json",
        ]
    };
    let one = bfnlab_workers(&args("g1.json", "r1.json"), dir.path(), "1");
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    let four = bfnlab_workers(&args("g2.json", "r2.json"), dir.path(), "4");
    assert!(four.status.success());
    let report = json_file(&dir.path().join("r1.json"));
    assert_eq!(report["recovery"], true);
    assert_eq!(report["config"]["seed"], 5);
    assert_eq!(report["config"]["n_samples"], 500);
    for key in ["err2", "pr_not_in_A", "bf", "bf_times_p", "live_count_hist", "votes"] {
        assert!(report.get(key).is_some(), "{key}");
    }
    assert_eq!(
        std::fs::read(dir.path().join("g1.json")).unwrap(),
        std::fs::read(dir.path().join("g2.json")).unwrap()
    );
    let mut r2 = json_file(&dir.path().join("r2.json"));
    r2["config"]["workers"] = report["config"]["workers"].clone();
    r2["config"]["out"] = report["config"]["out"].clone();
    assert_eq!(r2, report);

    let verify = bfnlab(
        &["verify", "--f", "c/instance-0000.json", "--g", "g1.json", "--p", "0.1", "--converse"],
        dir.path(),
    );
    assert!(verify.status.success());
    let v: Value = serde_json::from_slice(&verify.stdout).unwrap();
    assert_eq!(v["pr_not_in_A"], 0.0);
    assert_eq!(v["quantized"], true);
}

#[test]
fn oracle_methods_run() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("f.json"),
        r#"{"n": 3, "repr": "y_poly", "coeffs": [{"set": [0], "c": 0.97}, {"set": [], "c": 0.01}]}"#,
    )
    .unwrap();
    for method in ["oracle", "ks", "fkn"] {
        let out = bfnlab(&["oracle", "--input", "f.json", "--degree", "1", "--method", method], dir.path());
        assert!(out.status.success(), "{method}: {}", String::from_utf8_lossy(&out.stderr));
        let r: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(r["g"]["coeffs"][0]["set"], serde_json::json!([0]), "{method}");
        assert_eq!(r["g"]["coeffs"][0]["c"], 1.0, "{method}");
    }
}

#[test]
fn experiments_emit_csv_and_json() {
    let dir = TempDir::new().unwrap();
    let fd = bfnlab(&["experiment", "fd", "--n", "12", "--degrees", "1,2", "--points", "3"], dir.path());
    assert!(fd.status.success());
    let text = String::from_utf8(fd.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 6);
    assert!(text.starts_with("d,n,p,delta,pr_not_boolean"));

    let m = bfnlab(
        &["experiment", "moments", "--count", "3", "--n", "10", "--k", "2", "--format", "json", "--out", "m.json"],
        dir.path(),
    );
    assert!(m.status.success());
    let summary = json_file(&dir.path().join("m.json"));
    assert_eq!(summary["violations"], 0);
    assert_eq!(summary["rows"].as_array().unwrap().len(), 6);

    std::fs::write(
        dir.path().join("g.json"),
        r#"{"n": 5, "repr": "y_poly", "coeffs": [{"set": [0], "c": 1}, {"set": [1], "c": 1}, {"set": [2], "c": 1}]}"#,
    )
    .unwrap();
    let b = bfnlab(&["experiment", "bias", "--input", "g.json", "--p", "0.1", "--format", "json"], dir.path());
    let summary: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(summary["a_star"], 0.0);
    assert!((summary["pr_ne"].as_f64().unwrap() - (1.0 - 0.9f64.powi(3))).abs() < 1e-14);

    let t = bfnlab(&["experiment", "tail", "--input", "g.json", "--p", "0.1"], dir.path());
    let text = String::from_utf8(t.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
}
