use std::path::PathBuf;
use std::process::{Command, Output};

fn models() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("models")
}

fn model(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dta-measure"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn a1() -> [String; 4] {
    [
        "--model".into(),
        model("a1_model.json"),
        "--dta".into(),
        model("a_hat.json"),
    ]
}

fn with<'a>(cmd: &'a str, base: &'a [String], extra: &'a [&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend(base.iter().map(String::as_str));
    v.extend_from_slice(extra);
    v
}

#[test]
fn validate_accepts_bundled_models() {
    let o = run(&with("validate", &a1(), &[]));
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "valid");
}

#[test]
fn non_total_automaton_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("partial.json");
    std::fs::write(
        &path,
        r#"{
  "locations": ["q0", "q1"],
  "clocks": ["x"],
  "initial": "q0",
  "alphabet": ["a"],
  "edges": [
    { "from": "q0", "letter": "a", "guard": [], "resets": ["x"], "to": "q1" },
    { "from": "q1", "letter": "a", "guard": ["x<=2"], "resets": ["x"], "to": "q1" }
  ]
}"#,
    )
    .unwrap();
    let p = path.to_string_lossy().into_owned();
    let o = run(&["validate", "--model", &model("a1_model.json"), "--dta", &p]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("not total") && err.contains("q1"), "{err}");
}

#[test]
fn malformed_input_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ \"states\": [").unwrap();
    let p = path.to_string_lossy().into_owned();
    let o = run(&["validate", "--model", &p, "--dta", &model("a_hat.json")]);
    assert_eq!(code(&o), 3);
}

#[test]
fn regions_summary_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    let d = dot.to_string_lossy().into_owned();
    let o = run(&with("regions", &a1(), &["--dot", &d]));
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["vertices"], 10);
    assert_eq!(v["k"], 1);
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("->"));
}

#[test]
fn unwritable_output_exits_4() {
    let o = run(&with(
        "regions",
        &a1(),
        &["--dot", "/nonexistent-dir/g.dot"],
    ));
    assert_eq!(code(&o), 4);
}

#[test]
fn analyze_reports_frequencies() {
    let o = run(&with("analyze", &a1(), &["--grid", "1/8"]));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["k"], 1);
    assert!((v["bsccs"][0]["D"]["q_up"].as_f64().unwrap() - 0.5).abs() < 0.02);
}

#[test]
fn analyze_without_enough_iterations_exits_1() {
    let base = a1();
    let o = run(&with("analyze", &base, &["--max-iters", "1"]));
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_is_reproducible() {
    let base = a1();
    let args = with(
        "simulate",
        &base,
        &["--seed", "5", "--runs", "20", "--steps", "500"],
    );
    let (one, two) = (run(&args), run(&args));
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, two.stdout);
    let v: serde_json::Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(v["runs"], 20);
    assert!(v["estimates"]["D"]["q_up"].is_number());
}

#[test]
fn zero_runs_is_a_usage_error() {
    let base = a1();
    assert_eq!(code(&run(&with("simulate", &base, &["--runs", "0"]))), 3);
    assert_eq!(code(&run(&["analyze"])), 3);
}
