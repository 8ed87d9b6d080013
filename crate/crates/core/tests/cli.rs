use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trianalytic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

#[test]
fn classify_bundled_catalog() {
    let o = run(&["classify"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let kinds: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["verdict"]["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds.len(), 6);
    for kind in ["trianalytic", "complex-only-for", "not-complex"] {
        assert_eq!(kinds.iter().filter(|k| **k == kind).count(), 2, "{kind}");
    }
}

#[test]
fn classify_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verdicts.json");
    let o = run(&["classify", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 6);
}

#[test]
fn malformed_catalog_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\n  \"n\": 2,\n  \"entries\": [,]\n}").unwrap();
    let o = run(&["classify", "--catalog", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn missing_catalog_is_an_input_error() {
    assert_eq!(
        run(&["classify", "--catalog", "/nonexistent/catalog.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn sweep_emits_csv() {
    let o = run(&[
        "sweep",
        "--entry",
        "quaternionic-line",
        "--sphere-samples",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("l1,l2,l3,defect,complex"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.ends_with("true")));
}

#[test]
fn deform_flat_and_twisted_families() {
    let o = run(&["deform", "--family", "translation", "--samples", "50"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    // the twisted flow moves fibers off the quaternionic locus
    assert_eq!(
        run(&["deform", "--family", "twisted-flow", "--samples", "20"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn bundle_check_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nodes.csv");
    let o = run(&["bundle-check", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(&path).unwrap();
    assert!(csv.lines().count() > 1);
}

#[test]
fn selftest_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let reports: Vec<String> = ["a.json", "b.json"]
        .iter()
        .map(|name| {
            let path = dir.path().join(name);
            let o = run(&["selftest", "--seed", "3", "--out", path.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0));
            // per-suite lines differ only in their timing column
            assert!(stdout(&o).lines().all(|l| l.contains(" PASS ")));
            fs::read_to_string(path).unwrap()
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
    let v: serde_json::Value = serde_json::from_str(&reports[0]).unwrap();
    assert_eq!(v["seed"], 3);
    assert_eq!(v["suites"].as_array().unwrap().len(), 11);
}

#[test]
fn selftest_lists_suites() {
    let o = run(&["selftest", "--list"]);
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(names.len(), 11);
    assert!(names.contains(&"gauss-codazzi".to_string()));
}

#[test]
fn selftest_fails_at_impossible_tolerance() {
    assert_eq!(run(&["selftest", "--tol", "1e-15"]).status.code(), Some(1));
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(
        &path,
        r#"{"entry": "quaternionic-line", "sphere-samples": 4}"#,
    )
    .unwrap();
    let o = run(&["--config", path.to_str().unwrap(), "sweep"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 5);
}
