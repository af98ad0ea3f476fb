use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwsplit")).current_dir(corpus()).args(args).output().unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = run(&full);
    (out.status.code().unwrap(), serde_json::from_slice(&out.stdout).unwrap())
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn betti(v: &Value) -> Vec<u64> {
    v["result"]["algebra"]["betti"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect()
}

#[test]
fn validate_exit_codes() {
    assert_eq!(code(&["validate", "algebras/cp2.json"]), 0);
    let out = run(&["validate", "invalid/broken_associativity.json"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("associativity fails on (x, x, y)"), "{err}");
    assert_eq!(code(&["validate", "invalid/truncated_poincare.json"]), 3);
    assert_eq!(code(&["validate", "no/such/file.json"]), 2);
    assert_eq!(code(&["validate", "problems/t2_plain.json"]), 2);
    let (c, v) = json(&["validate", "invalid/truncated_poincare.json"]);
    assert_eq!(c, 3);
    assert_eq!(v["error"]["kind"], "validation");
}

#[test]
fn schema_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"formal_dimension": 2, "basis": [{"name": "1", "degree": 0}], "orientation": "z"}"#).unwrap();
    assert_eq!(code(&["validate", bad.to_str().unwrap()]), 2);
    std::fs::write(&bad, "{").unwrap();
    assert_eq!(code(&["validate", bad.to_str().unwrap()]), 2);
    assert_eq!(code(&["--leibniz-sign", "sideways", "validate", "algebras/cp2.json"]), 2);
}

#[test]
fn wang_dimensions() {
    let (c, v) = json(&["wang", "algebras/torus2.json", "--m", "2", "7"]);
    assert_eq!(c, 0);
    let spaces = v["result"]["spaces"].as_array().unwrap();
    assert_eq!(spaces[0]["dimension"], 2);
    assert_eq!(spaces[0]["space"]["basis"].as_array().unwrap().len(), 2);
    assert_eq!(spaces[1]["dimension"], 0);
    assert!(spaces[1]["note"].as_str().unwrap().contains("exceeds 2n+1"));
    let (_, v) = json(&["wang", "algebras/cp3.json"]);
    let dims: Vec<u64> = v["result"]["spaces"].as_array().unwrap().iter().map(|s| s["dimension"].as_u64().unwrap()).collect();
    assert_eq!(dims, vec![0; 6]);
}

#[test]
fn csplit_verdicts() {
    let (c, v) = json(&["csplit", "problems/t2_hamiltonian.json"]);
    assert_eq!((c, v["status"].as_str().unwrap()), (0, "CSplit"));
    let (c, v) = json(&["csplit", "problems/t2_plain.json"]);
    assert_eq!((c, v["status"].as_str().unwrap()), (1, "Inconclusive"));
    assert_eq!(v["result"]["systems"][0]["dimension_after"], 2);
    let (c, v) = json(&["csplit", "problems/t2_realized.json"]);
    assert_eq!((c, v["status"].as_str().unwrap()), (1, "Obstructed"));
    let (c, v) = json(&["csplit", "problems/cp5_t4_blowup.json"]);
    assert_eq!((c, v["status"].as_str().unwrap()), (0, "CSplit"));
    assert_eq!(v["metadata"]["multiplicative_completion"], true);
    let assumptions = v["assumptions"].to_string();
    assert!(assumptions.contains("image_nonzero = true (trusted)"));
    assert!(v["inputs"].as_object().unwrap().len() >= 5);
    assert_eq!(code(&["csplit", "--blanchard", "problems/blanchard_cp5.json"]), 0);
    assert_eq!(code(&["csplit", "--blanchard", "problems/blanchard_kodaira_thurston.json"]), 1);
}

#[test]
fn flux_reports() {
    let (c, v) = json(&["flux", "flux/cp3.json"]);
    assert_eq!(c, 0);
    assert_eq!((v["result"]["lower"].as_u64(), v["result"]["upper"].as_u64()), (Some(0), Some(0)));
    let (_, v) = json(&["flux", "flux/torus2.json"]);
    assert_eq!(v["result"]["upper"], 2);
    assert!(v["assumptions"].to_string().contains("dim G_Q = 2"));
    let (c, v) = json(&["flux", "flux/torus2_infeasible.json"]);
    assert_eq!((c, v["status"].as_str().unwrap()), (1, "InfeasibleInputs"));
}

#[test]
fn blowup_rings() {
    let (c, v) = json(&["blowup", "blowups/cp5_t4.json"]);
    assert_eq!(c, 0);
    assert_eq!(betti(&v), vec![1, 0, 2, 4, 8, 8, 8, 4, 2, 0, 1]);
    assert_eq!(v["result"]["exceptional_intersection"], "-1");
    assert_eq!(v["result"]["line_degree_sum"], 12);
    // additive count for a point: b_{2i} = 1 + [1 <= i <= k]
    let (_, v) = json(&["blowup", "blowups/cp5_point.json"]);
    assert_eq!(betti(&v), vec![1, 0, 2, 0, 2, 0, 2, 0, 2, 0, 1]);
    let (_, v) = json(&["blowup", "blowups/cp3_point.json"]);
    assert_eq!(betti(&v), vec![1, 0, 2, 0, 2, 0, 1]);
    let (c, v) = json(&["blowup", "blowups/cp5_t4_bad_sign.json"]);
    assert_eq!((c, v["error"]["kind"].as_str().unwrap()), (4, "sign_convention"));
}

#[test]
fn emitted_files_reload() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (c, v) = json(&["blowup", "--emit-certificates", "--out", out, "blowups/cp5_t4.json"]);
    assert_eq!(c, 0);
    let entries = v["result"]["line_table"]["entries"].as_array().unwrap();
    assert!(entries.iter().any(|e| e["args"] == serde_json::json!(["w*u^2", "w*u^2"])));
    let ring = std::fs::read_to_string(dir.path().join("ring.json")).unwrap();
    assert_eq!(ring, std::fs::read_to_string(corpus().join("rings/cp5_t4.json")).unwrap());
    assert_eq!(code(&["validate", dir.path().join("ring.json").to_str().unwrap()]), 0);
    assert!(dir.path().join("table_A.json").exists());
}

#[test]
fn certify_pairs() {
    let (c, v) = json(&["certify", "blowups/cp5_t4.json", "--alpha", "u^2", "--beta", "vol*u^2"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["checks"][0]["v_alpha"], "1");
    assert_eq!(v["result"]["checks"][0]["v_beta"], "vol");
    assert_eq!(code(&["certify", "blowups/cp5_t4.json", "--alpha", "1", "--beta", "1"]), 1);
    assert_eq!(code(&["certify", "blowups/cp5_t4.json", "--alpha", "3:u^2", "--beta", "vol*u^2"]), 1);
    assert_eq!(code(&["certify", "--relaxed", "blowups/cp5_t4.json", "--alpha", "3:u^2", "--beta", "vol*u^2"]), 0);
    assert_eq!(code(&["certify", "blowups/cp5_t4.json", "--family"]), 0);
    assert_eq!(code(&["certify", "blowups/cp5_t4.json"]), 2);
}

#[test]
fn human_output_lists_assumptions() {
    let out = run(&["csplit", "problems/cp5_t4_blowup.json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("verdict: CSplit"));
    assert!(text.contains("assumption: table A"));
    assert!(text.contains("multiplicative completion"));
}
