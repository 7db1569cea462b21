use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use curvreal::algebra::{self, InnerProduct};
use curvreal::document::{Model, ModelDocument, ModelOptions};
use curvreal::rational::parse_rational;
use curvreal::{AlgebraicCurvatureOperator, Signature, Tensor2};
use serde_json::{json, Value};
use tempfile::TempDir;

fn curvreal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvreal")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, serde_json::to_string_pretty(value).unwrap()).unwrap();
    p
}

fn write_model(dir: &TempDir, name: &str, a: AlgebraicCurvatureOperator, sig: Signature) -> PathBuf {
    let model = Model::new(a, sig, ModelOptions::default()).unwrap();
    write(dir, name, &serde_json::to_value(ModelDocument::from_model(&model)).unwrap())
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn single_component_document() -> Value {
    json!({
        "format_version": 1,
        "dim": 3,
        "signature": [0, 3],
        "operator": [
            {"indices": [1, 2, 1, 2], "value": "1"},
            {"indices": [2, 1, 1, 2], "value": "-1"}
        ]
    })
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn zero_operator_gives_zero_connection() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "zero.json", &json!({"format_version": 1, "dim": 3, "signature": [1, 2], "operator": []}));
    let out = dir.path().join("gamma.json");
    let o = curvreal(&["realize", path_str(&model), "--output", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = read(&out);
    assert_eq!(doc["components"], json!([]));
    assert_eq!(doc["cap"], json!(5));
}

#[test]
fn single_component_operator_degree_one_part() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "a.json", &single_component_document());
    let out = dir.path().join("gamma.json");
    let report = dir.path().join("report.json");
    let o = curvreal(&["realize", path_str(&model), "--output", path_str(&out), "--report", path_str(&report)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let doc = read(&out);
    let mut linear = Vec::new();
    for c in doc["components"].as_array().unwrap() {
        for term in c["jet"].as_array().unwrap() {
            let e: Vec<u64> = term["exponents"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
            let degree: u64 = e.iter().sum();
            assert!(degree != 0 && degree != 2, "unexpected degree {degree} term in {c}");
            if degree == 1 {
                let key = (c["i"].as_u64().unwrap(), c["j"].as_u64().unwrap(), c["k"].as_u64().unwrap());
                linear.push((key, e, term["coeff"].as_str().unwrap().to_string()));
            }
        }
    }
    linear.sort();
    assert_eq!(
        linear,
        vec![
            ((1, 1, 2), vec![0, 1, 0], "-2/3".to_string()),
            ((1, 2, 2), vec![1, 0, 0], "1/3".to_string()),
            ((2, 1, 2), vec![1, 0, 0], "1/3".to_string()),
        ]
    );

    let rep = read(&report);
    assert_eq!(rep["format_version"], json!(1));
    assert_eq!(rep["report"]["verification"]["all_pass"], json!(true));
    assert!(rep["report"]["iterations"].as_array().unwrap().len() <= 3);
}

#[test]
fn cyclic_identity_violation_is_rejected_at_load() {
    let dir = TempDir::new().unwrap();
    let mut doc = single_component_document();
    doc["operator"] = json!([
        {"indices": [1, 2, 3, 1], "value": "1"},
        {"indices": [2, 1, 3, 1], "value": "-1"}
    ]);
    let model = write(&dir, "bad.json", &doc);
    let o = curvreal(&["realize", path_str(&model), "--check-only"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("cyclic identity"), "{}", stderr(&o));
}

#[test]
fn non_normal_metric_is_rejected_with_hint() {
    let dir = TempDir::new().unwrap();
    let mut doc = single_component_document();
    doc["metric"] = json!([["2", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]);
    let model = write(&dir, "m.json", &doc);
    let o = curvreal(&["realize", path_str(&model), "--check-only"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("congruence"), "{}", stderr(&o));
}

#[test]
fn realize_then_check_round_trip_and_tampering() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("model.json");
    let o = curvreal(&["random-model", "--dim", "3", "--signature", "1,2", "--seed", "7", "--curved", "--output", path_str(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let gamma = dir.path().join("gamma.json");
    let o = curvreal(&["realize", path_str(&model), "--output", path_str(&gamma)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let verdicts = dir.path().join("verdicts.json");
    let o = curvreal(&["check", path_str(&gamma), path_str(&model), "--output", path_str(&verdicts)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read(&verdicts)["suite"]["all_pass"], json!(true));

    // Bump a linear coefficient of Γ_{ii}^k in a variable x_w with w ≠ i, which
    // shifts R_{wii}^k at the origin.
    let mut doc = read(&gamma);
    let comps = doc["components"].as_array_mut().unwrap();
    let term = comps
        .iter_mut()
        .filter(|c| c["i"] == c["j"])
        .flat_map(|c| {
            let i = c["i"].as_u64().unwrap() as usize - 1;
            c["jet"].as_array_mut().unwrap().iter_mut().filter(move |t| {
                let e: Vec<u64> = t["exponents"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
                e.iter().sum::<u64>() == 1 && e[i] == 0
            })
        })
        .next()
        .expect("off-axis linear term on a diagonal component");
    let old = parse_rational(term["coeff"].as_str().unwrap()).unwrap();
    term["coeff"] = json!(curvreal::rational::format_rational(&(old + curvreal::rational::int(1))));
    let tampered = write(&dir, "tampered.json", &doc);
    let o = curvreal(&["check", path_str(&tampered), path_str(&model)]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("component") && err.contains("expected"), "{err}");
}

#[test]
fn asymmetric_christoffel_is_rejected() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "a.json", &single_component_document());
    let gamma = write(
        &dir,
        "g.json",
        &json!({
            "format_version": 1, "dim": 3, "cap": 5,
            "components": [{"i": 1, "j": 2, "k": 2, "jet": [{"exponents": [1, 0, 0], "coeff": "1/3"}]}]
        }),
    );
    let o = curvreal(&["check", path_str(&gamma), path_str(&model)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("torsion"), "{}", stderr(&o));
}

#[test]
fn shape_mismatch_is_rejected() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "a.json", &single_component_document());
    let gamma = write(&dir, "g.json", &json!({"format_version": 1, "dim": 4, "cap": 5, "components": []}));
    let o = curvreal(&["check", path_str(&gamma), path_str(&model)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("shape mismatch"));
}

#[test]
fn missing_file_is_an_io_error() {
    let o = curvreal(&["classify", "/nonexistent/model.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_only_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "a.json", &single_component_document());
    let o = curvreal(&["realize", path_str(&model), "--check-only", "--order", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn classify_zero_operator() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "z.json", AlgebraicCurvatureOperator::zero(3).unwrap(), Signature::new(0, 3));
    let o = curvreal(&["classify", path_str(&model)]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        v["classification"],
        json!({"projectively_flat": true, "ricci_symmetric": true, "ricci_antisymmetric": true, "ricci_traceless": true})
    );
    assert_eq!(v["scalar_curvature"], json!("0/1"));
}

#[test]
fn classify_sigma_s_of_metric() {
    let dir = TempDir::new().unwrap();
    let sig = Signature::new(1, 2);
    let a = algebra::sigma_s(&sig.diagonal()).unwrap();
    let model = write_model(&dir, "s.json", a, sig);
    let o = curvreal(&["classify", path_str(&model)]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["classification"]["ricci_symmetric"], json!(true));
    assert_eq!(v["scalar_curvature"], json!("3/1"));
}

#[test]
fn classify_matches_direct_recomputation() {
    let dir = TempDir::new().unwrap();
    for seed in 0..4 {
        let model = dir.path().join(format!("r{seed}.json"));
        let s = seed.to_string();
        let mut args = vec!["random-model", "--dim", "4", "--signature", "1,3", "--seed", &s];
        if seed % 2 == 1 {
            args.push("--ricci-symmetric");
        }
        args.extend(["--output", path_str(&model)]);
        assert!(curvreal(&args).status.success());
        let o = curvreal(&["classify", path_str(&model)]);
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();

        let m: ModelDocument = serde_json::from_value(read(&model)).unwrap();
        let m = m.into_model().unwrap();
        let g = InnerProduct::standard(m.signature);
        let c = algebra::classify(&m.operator, &g).unwrap();
        assert_eq!(v["classification"], serde_json::to_value(c).unwrap());
        let tau = algebra::scalar_curvature(&m.operator, &g).unwrap();
        assert_eq!(parse_rational(v["scalar_curvature"].as_str().unwrap()).unwrap(), tau);
        let rows: Vec<Vec<String>> = serde_json::from_value(v["ricci"].clone()).unwrap();
        let rho = algebra::ricci(&m.operator);
        let parsed = Tensor2::from_fn(4, |[i, j]| parse_rational(&rows[i][j]).unwrap());
        assert_eq!(parsed, rho);
        if seed % 2 == 1 {
            assert!(c.ricci_symmetric);
        }
    }
}

#[test]
fn random_model_is_deterministic_and_honours_flags() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let p = dir.path().join(name);
        let mut args = vec!["random-model", "--dim", "3", "--seed", "42"];
        args.extend_from_slice(extra);
        args.extend(["--output", path_str(&p)]);
        let o = curvreal(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        let doc: ModelDocument = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        (fs::read(&p).unwrap(), doc.into_model().unwrap())
    };
    let (first, _) = run("a.json", &[]);
    let (second, _) = run("b.json", &[]);
    assert_eq!(first, second);

    let (_, sym) = run("sym.json", &["--ricci-symmetric"]);
    assert!(algebra::ricci_antisymmetric(&sym.operator).is_zero());
    let (_, anti) = run("anti.json", &["--ricci-antisymmetric"]);
    assert!(algebra::ricci_symmetric(&anti.operator).is_zero());
    let (_, traceless) = run("t.json", &["--traceless", "--signature", "1,2"]);
    let g = InnerProduct::standard(Signature::new(1, 2));
    assert_eq!(algebra::scalar_curvature(&traceless.operator, &g).unwrap(), curvreal::rational::int(0));

    let o = curvreal(&["random-model", "--dim", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let o = curvreal(&["random-model", "--dim", "3", "--signature", "1,1"]);
    assert_eq!(o.status.code(), Some(3));
}
