use std::path::PathBuf;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let argv = std::iter::once("iwasawa").chain(args.iter().copied());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = iwasawa::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn temp(name: &str, contents: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("iwasawa-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, contents).unwrap();
    p
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).expect("stdout is json")
}

const TAU_V1: &str = r#"{"v1": [["0", "0", "-1"], ["0", "-1", "0"], ["-1", "0", "0"]]}"#;

#[test]
fn classify_tau() {
    let p = temp("tau.json", TAU_V1);
    let (code, out, _) = run(&["aut", "classify", "--n", "4", "--field", "R", "--in", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["epsilon"], 1);
    assert_eq!(v["lambda"], serde_json::json!(["1", "1", "1", "1"]));
    assert_eq!(v["h"], "id");
}

#[test]
fn forms_pair_verdicts() {
    let (code, out, _) = run(&["forms", "check", "--n", "5", "--pair", "omega_plus:eta_3_minus"]);
    assert_eq!(code, 0);
    let v = json(&out);
    for k in ["degree", "weight", "closed"] {
        assert_eq!(v["verdicts"][k], true, "{k}");
    }
}

#[test]
fn single_form_report() {
    let (code, out, _) = run(&["forms", "check", "--n", "4", "--form", "beta1"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["closed"], false);
    assert_eq!(v["degree"], 1);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["algebra", "frobnicate"]).0, 2);
    assert_eq!(run(&["forms", "check", "--n", "5"]).0, 2);
    assert_eq!(run(&["forms", "check", "--n", "5", "--pair", "omega_plus:nonsense"]).0, 2);
    assert_eq!(run(&["suite", "acceptance", "--only", "11"]).0, 2);
    let p = temp("conflict.json", r#"{"n": 5, "v1": []}"#);
    assert_eq!(run(&["aut", "classify", "--n", "4", "--in", p.to_str().unwrap()]).0, 2);
}

#[test]
fn malformed_input_reports_position() {
    let p = temp("broken.json", "{\n  \"n\": 4,\n  \"v1\": [[\"0\",\n}");
    let (code, _, err) = run(&["aut", "classify", "--in", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line"), "{err}");
    let p = temp("badfield.json", r#"{"n": 4, "field": "R", "v1": [["x", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]}"#);
    let (code, _, err) = run(&["aut", "classify", "--in", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("$.v1"), "{err}");
}

#[test]
fn domain_errors_exit_1() {
    let p = temp("singular.json", r#"{"n": 4, "field": "R", "v1": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "0"]]}"#);
    assert_eq!(run(&["aut", "classify", "--in", p.to_str().unwrap()]).0, 1);
    let p = temp("upper.json", r#"{"field": "R", "matrix": [["1", "1"], ["0", "1"]]}"#);
    assert_eq!(run(&["rigidity", "escape-flag", "--in", p.to_str().unwrap()]).0, 1);
}

#[test]
fn out_flag_writes_file() {
    let p = temp("tau2.json", TAU_V1);
    let o = std::env::temp_dir().join(format!("iwasawa-cli-{}-cert.json", std::process::id()));
    let (code, out, _) =
        run(&["aut", "classify", "--n", "4", "--field", "R", "--in", p.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    assert_eq!(json(&std::fs::read_to_string(&o).unwrap())["epsilon"], 1);
}

#[test]
fn outputs_are_byte_identical() {
    let g = temp(
        "proj.json",
        r#"{"field": "R", "family": "projective", "g": [["2", "1", "0"], ["0", "1", "3"], ["1", "0", "1"]], "radius": "1/4"}"#,
    );
    let args = ["rigidity", "reconstruct", "--n", "3", "--seed", "11", "--in", g.to_str().unwrap()];
    let a = run(&args);
    assert_eq!(a.0, 0, "{}", a.2);
    assert_eq!(a, run(&args));
    let b = run(&["algebra", "check", "--n", "4", "--field", "C", "--seed", "3"]);
    assert_eq!(b.0, 0);
    assert_eq!(b, run(&["algebra", "check", "--n", "4", "--field", "C", "--seed", "3"]));
}

#[test]
fn pansu_and_dynamics_commands() {
    let p = temp("diff.json", r#"{"map": "contact-shear"}"#);
    let (code, out, err) = run(&["pansu", "diff", "--in", p.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(json(&out)["v1"].is_array());
    let p = temp("beta.json", r#"{"field": "R", "v": ["1", "2", "3"], "j": 1, "r": "1/2"}"#);
    let (code, out, err) = run(&["dynamics", "beta", "--in", p.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json(&out)["contracts"], true);
}
