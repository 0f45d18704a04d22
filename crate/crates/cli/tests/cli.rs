use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rcdfs"));
    c.env_remove("RCDFS_SEED");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn ok_json(dir: &Path, args: &[&str]) -> Value {
    let out = run_in(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas").join(format!("{name}.schema.json"));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&doc).unwrap()
}

fn assert_valid(name: &str, value: &Value) {
    let v = schema(name);
    let errors: Vec<String> = v.iter_errors(value).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn planted(dir: &Path, rows: &str, features: &str) -> &'static str {
    let out = run_in(dir, &["synth", "planted", "--rows", rows, "--features", features, "--output", "p.csv"]);
    assert!(out.status.success());
    "p.csv"
}

#[test]
fn select_trace_has_requested_length() {
    let d = tempfile::tempdir().unwrap();
    let input = planted(d.path(), "120", "22");
    let v = ok_json(d.path(), &["select", "--input", input, "--method", "rcdfs", "--delta", "10", "--no-discretize"]);
    assert_eq!(v["result"]["trace"]["selected"].as_array().unwrap().len(), 10);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_valid("selection_trace", &v);

    let verbose = ok_json(d.path(), &["select", "--input", input, "--delta", "3", "--verbose", "--no-discretize"]);
    assert_eq!(verbose["result"]["trace"]["candidates"].as_array().unwrap().len(), 3);
    assert_valid("selection_trace", &verbose);

    for method in ["mim", "mrmr", "cmim", "fcbf", "relieff"] {
        let v = ok_json(d.path(), &["select", "--input", input, "--method", method, "--delta", "4"]);
        assert_valid("selection_trace", &v);
    }
}

#[test]
fn curve_default_length() {
    let d = tempfile::tempdir().unwrap();
    let input = planted(d.path(), "60", "60");
    let v = ok_json(d.path(), &["curve", "--input", input, "--method", "mim", "--folds", "3", "--repeats", "1", "--no-discretize"]);
    assert_eq!(v["config"]["m"], 30);
    assert_eq!(v["result"]["errors"].as_array().unwrap().len(), 30);
    assert_valid("curve", &v);
}

#[test]
fn compare_report_and_text() {
    let d = tempfile::tempdir().unwrap();
    let input = planted(d.path(), "100", "10");
    let out = run_in(
        d.path(),
        &["compare", "--input", input, "--folds", "5", "--repeats", "3", "--output", "r.json", "--table", "r.txt"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("r.json")).unwrap()).unwrap();
    assert_valid("benchmark_report", &v);
    assert_eq!(v["result"]["methods"].as_array().unwrap().len(), 6);
    let text = std::fs::read_to_string(d.path().join("r.txt")).unwrap();
    assert!(text.contains("p-val") && text.contains("Friedman"));

    let fold = ok_json(d.path(), &["compare", "--input", input, "--method", "rcdfs,mim", "--folds", "5", "--repeats", "2", "--samples", "fold"]);
    assert_eq!(fold["result"]["methods"][0]["samples"].as_array().unwrap().len(), 10);
    assert_valid("benchmark_report", &fold);
}

#[test]
fn discretize_model_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let mut csv = String::from("a,b,y\n");
    for i in 0..40 {
        csv.push_str(&format!("{},{},{}\n", i, (i * 7) % 13, if i < 20 { "lo" } else { "hi" }));
    }
    std::fs::write(d.path().join("n.csv"), csv).unwrap();
    let out = run_in(d.path(), &["discretize", "--input", "n.csv", "--output", "m.json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("m.json")).unwrap()).unwrap();
    assert_valid("discretization_model", &v);
    assert_eq!(v["result"]["features"][0]["cuts"], serde_json::json!([19.5]));

    let fitted = ok_json(d.path(), &["select", "--input", "n.csv", "--delta", "2"]);
    let reused = ok_json(d.path(), &["select", "--input", "n.csv", "--delta", "2", "--model", "m.json"]);
    assert_eq!(fitted["result"]["trace"], reused["result"]["trace"]);
}

#[test]
fn arff_input_and_synth() {
    let d = tempfile::tempdir().unwrap();
    let out = run_in(d.path(), &["synth", "duplicate", "--format", "arff", "--output", "dup.arff"]);
    assert!(out.status.success());
    assert_valid("synth", &serde_json::from_slice(&out.stdout).unwrap());
    let v = ok_json(d.path(), &["select", "--input", "dup.arff", "--delta", "2"]);
    let mut sel: Vec<u64> = v["result"]["trace"]["selected"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    sel.sort_unstable();
    assert_eq!(sel, [0, 2]);
}

#[test]
fn seed_env_fallback() {
    let d = tempfile::tempdir().unwrap();
    let input = planted(d.path(), "80", "8");
    let out = bin()
        .args(["select", "--input", input, "--method", "relieff", "--delta", "3"])
        .current_dir(d.path())
        .env("RCDFS_SEED", "42")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 42);
    assert_eq!(v["result"]["trace"]["seed"], 42);
    let explicit = bin()
        .args(["select", "--input", input, "--method", "relieff", "--delta", "3", "--seed", "7"])
        .current_dir(d.path())
        .env("RCDFS_SEED", "42")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&explicit.stdout).unwrap();
    assert_eq!(v["seed"], 7);
}

fn assert_error(out: &Output, code: i32, kind: &str) {
    assert_eq!(out.status.code(), Some(code));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["kind"], kind);
    assert_valid("error", &v);
}

#[test]
fn failures_emit_error_objects() {
    let d = tempfile::tempdir().unwrap();
    let input = planted(d.path(), "60", "8");
    assert_error(&run_in(d.path(), &["compare", "--input", input, "--method", "rcdfs"]), 1, "input");
    assert_error(&run_in(d.path(), &["select", "--input", input, "--class", "nope"]), 1, "input");
    assert_error(&run_in(d.path(), &["select", "--input", "missing.csv"]), 1, "io");
    assert_error(&run_in(d.path(), &["select", "--input", input, "--method", "bogus"]), 2, "usage");
    assert_error(&run_in(d.path(), &["select", "--input", input, "--delta", "99", "--no-discretize"]), 1, "input");

    std::fs::write(d.path().join("ragged.csv"), "a,b,c\n1,2,x\n3,y\n").unwrap();
    assert_error(&run_in(d.path(), &["select", "--input", "ragged.csv"]), 1, "parse");
    std::fs::write(d.path().join("s.arff"), "@relation s\n@attribute a numeric\n@attribute c {x,y}\n@data\n{0 1}\n").unwrap();
    assert_error(&run_in(d.path(), &["select", "--input", "s.arff"]), 1, "unsupported");
}
