//! End-to-end runs of the `directed-ot` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_directed-ot"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn validator() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn assert_valid(doc: &Value) {
    let v = validator();
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{doc}");
}

fn float(v: &Value) -> f64 {
    directed_ot::report::parse_float(v).expect("float field")
}

const COMPUTE: &[&str] = &["compute", "--p", "uniform:0,1", "--q", "uniform:0,2", "--gen", "quadratic", "--scaling", "cbd"];

#[test]
fn compute_quadrature() {
    let out = run(COMPUTE);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_valid(&doc);
    assert!((float(&doc["value"]) - 1.0 / 6.0).abs() < 1e-9);
}

#[test]
fn compute_methods() {
    let exact = json(&run(&[
        "compute", "--p", "discrete:v=1,3;w=0.5,0.5", "--q", "discrete:v=2", "--gen", "tv", "--c", "0.5", "--scaling", "tvscaled",
    ]));
    assert_valid(&exact);
    assert_eq!(exact["method"], "exact_breakpoint");
    assert_eq!(float(&exact["value"]), 1.0);

    let mut args = COMPUTE.to_vec();
    args.extend(["--method", "mc", "--n", "100000", "--seed", "5"]);
    let mc = json(&run(&args));
    assert_valid(&mc);
    assert_eq!(mc["method"], "monte_carlo");
    assert!((float(&mc["value"]) - 1.0 / 6.0).abs() < 4.0 * float(&mc["error_estimate"]));
}

#[test]
fn infinite_divergence_exits_numerical() {
    let out = run(&["compute", "--p", "uniform:1,2", "--q", "uniform:0,1", "--gen", "power:gamma=3", "--scaling", "casm"]);
    assert_eq!(out.status.code(), Some(3));
    let doc = json(&out);
    assert_valid(&doc);
    assert_eq!(doc["value"], "inf");
}

#[test]
fn usage_errors() {
    let out = run(&["compute", "--p", "uniform:0,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_valid(&json(&out));

    let out = run(&["compute", "--p", "uniform:0,1", "--q", "gamma:2", "--gen", "kl", "--scaling", "casm"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "parse");

    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_optimality_random() {
    let out = run(&["verify-optimality", "--n", "6", "--trials", "100", "--gen", "power:gamma=2", "--scaling", "casm", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_valid(&doc);
    assert_eq!(doc["passes"], 100);
    assert_eq!(doc["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn verify_optimality_negative_control() {
    let out = run(&["verify-optimality", "--gen", "pointwise:sqrt-abs", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "precondition");

    let out = run(&["verify-optimality", "--gen", "pointwise:sqrt-abs", "--trials", "30", "--force"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_valid(&doc);
    assert!(!doc["failures"].as_array().unwrap().is_empty());

    let out = run(&["verify-optimality", "--p", "empirical:0,1", "--q", "empirical:2,3", "--gen", "pointwise:sqrt-abs"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_valid(&doc);
    assert!(float(&doc["A"]) - float(&doc["C"]) > 0.04);
}

#[test]
fn check_monge_witness() {
    let out = run(&["check-monge", "--gen", "pointwise:sqrt-abs", "--u-range", "0,1", "--v-range", "2,3", "--n", "11"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_valid(&doc);
    assert_eq!(doc["verdict"], "fail");
    let witness: Vec<f64> = doc["witness"].as_array().unwrap().iter().map(float).collect();
    assert_eq!(witness, vec![0.0, 1.0, 2.0, 3.0]);

    let out = run(&["check-monge", "--gen", "kl", "--scaling", "casm"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_valid(&doc);
    assert_eq!(doc["mixed_partial"]["method"], "analytic");
}

#[test]
fn monge_and_properties() {
    let out = run(&["monge", "--p", "normal:0,1", "--q", "normal:1,2", "--gen", "quadratic", "--scaling", "cbd"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let doc = json(&out);
    assert_valid(&doc);
    assert_eq!(doc["agreement"]["passed"], true);

    let out = run(&["monge", "--p", "discrete:v=1", "--q", "uniform:0,1", "--gen", "quadratic", "--scaling", "cbd"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "unsupported");

    let out = run(&["properties", "--p", "exp:1", "--q", "exp:2", "--gen", "kl", "--scaling", "casm", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_valid(&doc);
    assert!(float(&doc["asymmetry"]["difference"]) > 1e-3);
}

#[test]
fn output_is_deterministic_and_thread_independent() {
    let args = ["verify-optimality", "--trials", "40", "--gen", "quartic", "--scaling", "cbd", "--seed", "9"];
    let first = run(&args).stdout;
    assert_eq!(first, run(&args).stdout);
    let single = bin().args(args).env("DIRECTED_OT_THREADS", "1").output().unwrap().stdout;
    assert_eq!(first, single);

    let quad = ["check-monge", "--gen", "power:gamma=0.5", "--scaling", "casm", "--seed", "2"];
    let many = run(&quad).stdout;
    let one = bin().args(quad).env("DIRECTED_OT_THREADS", "1").output().unwrap().stdout;
    assert_eq!(many, one);
}

#[test]
fn out_file_and_empirical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("samples.csv");
    std::fs::write(&data, "1.0\n3.0\n\n2.0\n").unwrap();
    let target = dir.path().join("report.json");
    let p = format!("empirical:@{}", data.display());
    let out = run(&[
        "compute", "--p", &p, "--q", "discrete:v=2", "--gen", "quadratic", "--scaling", "cbd", "--out", target.to_str().unwrap(), "--human",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("D = "));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_valid(&doc);
    // ⅓·½ + 0 + ⅓·½
    assert!((float(&doc["value"]) - 1.0 / 3.0).abs() < 1e-15);
}
