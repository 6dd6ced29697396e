use semiflow::C64;
use semiflow_cli::{run, EXIT_CONFIG, EXIT_NUMERIC};
use serde_json::Value;
use std::process::Command;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("semiflow").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn num(v: &Value) -> f64 {
    match v {
        Value::Number(n) => n.as_f64().unwrap(),
        Value::String(s) => s.parse().unwrap(),
        _ => panic!("not a number: {v}"),
    }
}

#[test]
fn classify_quadrant() {
    let (code, out, _) = call(&["classify", "--catalog", "quadrant"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((num(&v["alpha"]) - 0.5).abs() < 5e-3);
    assert_eq!(v["regime"], "tangential");
}

#[test]
fn bfid_par_lists_three_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("p.svg");
    let (code, out, _) = call(&["bfid", "--catalog", "bfid-par", "--svg", svg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let certs = v["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 3);
    assert_eq!(certs.iter().filter(|c| c["bfid_type"] == "p-type").count(), 2);
    for c in certs {
        assert!(num(&c["residual_sup"]) < 1e-6);
    }
    let svg = std::fs::read_to_string(svg).unwrap();
    assert_eq!(svg.matches("class=\"bfid\"").count(), 3);
    assert!(svg.contains("class=\"disk\""));
}

#[test]
fn trace_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let (code, _, _) = call(&["trace", "--f", "-(1-z)^2*i", "--z0", "0", "--t", "10", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(csv).unwrap();
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(last[0], 10.0);
    // u' = i(1-u)^2 gives 1/(1-u) = 1 + it
    let exact = C64::new(1.0, 0.0) - C64::new(1.0, 0.0) / C64::new(1.0, 10.0);
    assert!((C64::new(last[1], last[2]) - exact).norm() < 1e-9);
}

#[test]
fn output_is_deterministic() {
    let args = ["linearize", "--catalog", "bfid-hyp", "--z0", "0.3,-0.2"];
    let a = call(&args);
    let b = call(&args);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    let dir = tempfile::tempdir().unwrap();
    let (p, q) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&p, &q] {
        call(&["trace", "--catalog", "quadrant", "--z0", "-0.5,0.5", "--t", "100", "--csv", p.to_str().unwrap()]);
    }
    assert_eq!(std::fs::read(p).unwrap(), std::fs::read(q).unwrap());
}

#[test]
fn seventeen_significant_digits() {
    let (_, out, _) = call(&["trace", "--f", "z^2-1", "--t", "1"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(out.contains("\"t_final\": 1.0000000000000000e0"));
    assert!((num(&v["z_final"]["re"]) - (1.0f64).tanh()).abs() < 1e-10);
}

#[test]
fn parse_and_config_errors_exit_2() {
    assert_eq!(call(&["trace", "--f", "z+"]).0, EXIT_CONFIG);
    assert_eq!(call(&["trace", "--f", "w"]).0, EXIT_CONFIG);
    assert_eq!(call(&["trace", "--catalog", "nope"]).0, EXIT_CONFIG);
    assert_eq!(call(&["trace", "--f", "z", "--catalog", "quadrant"]).0, EXIT_CONFIG);
    assert_eq!(call(&["trace"]).0, EXIT_CONFIG);
    assert_eq!(call(&["classify", "--catalog", "quadrant", "--horizon", "-1"]).0, EXIT_CONFIG);
    assert_eq!(call(&["trace", "--f", "z^2-1", "--z0", "1,2,3"]).0, EXIT_CONFIG);
    // z pushes the flow towards 0, not 1
    let (code, _, err) = call(&["classify", "--f", "z"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("not a generator"));
    assert_eq!(call(&["frobnicate"]).0, EXIT_CONFIG);
}

#[test]
fn numeric_failures_exit_3_with_json() {
    let (code, out, _) = call(&["trace", "--f", "z^2-1", "--z0", "2,0"]);
    assert_eq!(code, EXIT_NUMERIC);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["error"], "not-in-disk");
    let (code, out, _) = call(&["conjugate", "--catalog", "no-halfplane"]);
    assert_eq!(code, EXIT_NUMERIC);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["error"], "undetermined");
}

#[test]
fn conjugate_parabolic_auto() {
    let (code, out, _) = call(&["conjugate", "--catalog", "parabolic-auto(1)", "--z0", "0.2,0.1"]);
    assert_eq!(code, 0, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(num(&v["residual_sup"]) < 1e-8);
}

#[test]
fn catalog_verbs() {
    let (code, out, _) = call(&["catalog", "list"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 12);
    let (code, out, _) = call(&["catalog", "show", "power(0,i)"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"id\""));
    assert_eq!(call(&["catalog", "show", "nope"]).0, EXIT_CONFIG);
}

#[test]
fn validate_reports_non_generators() {
    let (code, out, _) = call(&["validate", "--f", "z"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["is_generator"], false);
    let (_, out, _) = call(&["validate", "--catalog", "bfid-hyp"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["is_generator"], true);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_semiflow");
    let ok = Command::new(bin).args(["catalog", "show", "quadrant"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin).args(["classify", "--f", "(("]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_CONFIG));
}
