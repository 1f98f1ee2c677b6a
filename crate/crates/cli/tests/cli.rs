use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_puiseux")).arg("--quiet").args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn trace_of_the_worked_example() {
    let eq = fixtures().join("sec23.eq");
    let sol = fixtures().join("sec23.sol");
    let o = run(&["trace", "--eq", path(&eq), "--solution", path(&sol), "--op", "diff"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let steps: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(steps.len(), 4);
    let ks: Vec<i64> = steps.iter().map(|s| s["k"].as_i64().unwrap()).collect();
    assert_eq!(ks, [1, 2, 3, 4]);
    assert_eq!(steps[1]["dicritical"], true);
    assert_eq!(steps[1]["phi"]["text"], "0");
    assert_eq!(steps[2]["phi"]["text"], "-(1/2)*C^3 + (11/2)*C");
    assert_eq!(steps[3]["root"], "-(121/30)");
}

#[test]
fn trace_in_the_rational_backend_rejects_square_roots() {
    let eq = fixtures().join("sec23.eq");
    let sol = fixtures().join("sec23.sol");
    let o = run(&["trace", "--eq", path(&eq), "--solution", path(&sol), "--backend", "rational"]);
    assert_eq!(code(&o), 2);
    let o = run(&["trace", "--eq", path(&eq), "--solution", path(&sol), "--backend", "quadratic:7"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn render_of_the_sample_equation() {
    let eq = fixtures().join("fig1.eq");
    let args = ["render", "--eq", path(&eq), "--op", "q", "--q", "2", "--lines", "1/2,2"];
    let o = run(&args);
    assert_eq!(code(&o), 0);
    let svg = String::from_utf8(o.stdout.clone()).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<circle").count(), 7);
    assert_eq!(svg.matches("fill=\"white\" stroke=\"black\"").count(), 2);
    assert_eq!(svg.matches("class=\"support\"").count(), 2);
    assert_eq!(run(&args).stdout, o.stdout);

    let o = run(&["render", "--eq", path(&eq), "--format", "json", "--lines", "1/2"]);
    let v = json(&o);
    assert_eq!(v["vertices"], serde_json::json!([[0, 1, 4], [1, 1, 2], [5, 1, 0]]));
    assert_eq!(v["cloud"].as_array().unwrap().len(), 5);
}

#[test]
fn render_panels_along_a_solution() {
    let eq = fixtures().join("sec23.eq");
    let sol = fixtures().join("sec23.sol");
    let o = run(&["render", "--eq", path(&eq), "--solution", path(&sol)]);
    assert_eq!(code(&o), 0);
    let svg = String::from_utf8(o.stdout).unwrap();
    assert_eq!(svg.matches("class=\"panel\"").count(), 4);
}

#[test]
fn verify_on_an_empty_directory_is_vacuous() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--fixture", path(dir.path())]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["fixtures"], 0);
    assert_eq!(v["checks"], 0);
    assert_eq!(v["pass"], true);
}

#[test]
fn corpus_gen_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("corpus");
    let o = run(&["corpus-gen", "--seed", "3", "--genus", "2", "--count", "12", "--out", path(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["count"], 12);
    let o = run(&["verify", "--fixture", path(&out), "--strictness"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = json(&o);
    assert_eq!(v["fixtures"], 12);
    assert!(v["checks"].as_u64().unwrap() >= 12 * 5);

    // Same seed, same bytes.
    let again = dir.path().join("again");
    run(&["corpus-gen", "--seed", "3", "--genus", "2", "--count", "12", "--out", path(&again)]);
    for f in ["0000.json", "0011.json"] {
        assert_eq!(std::fs::read(out.join(f)).unwrap(), std::fs::read(again.join(f)).unwrap());
    }
}

#[test]
fn q_corpus_in_the_numeric_backend() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q");
    let common = ["--op", "q", "--q", "(3 + i/4)", "--backend", "numeric"];
    let gen = [&common[..], &["corpus-gen", "--seed", "1", "--genus", "1", "--count", "4", "--max-ram", "4", "--out", path(&out)]].concat();
    assert_eq!(code(&run(&gen)), 0);
    let o = run(&["--backend", "numeric", "verify", "--fixture", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn a_wrong_fixture_fails_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    let body = r#"{"op": "diff", "equation": "y^2 - x^3", "solution": "x^(3/2)",
        "characteristic": {"n": 2, "genus": 0, "exponents": [], "pairs": []}}"#;
    std::fs::write(&f, body).unwrap();
    let o = run(&["verify", "--fixture", path(&f)]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["characteristic_matches_fixture"], false);
}

#[test]
fn foliation_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("cusp.json");
    std::fs::write(&f, r#"{"a": "-3*x^2", "b": "2*y", "solution": "x^(3/2)", "seed": 4}"#).unwrap();
    let o = run(&["verify", "--fixture", path(&f)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!((v["nu0"].as_u64(), v["bound"].as_i64()), (Some(1), Some(1)));
}

#[test]
fn verify_one_equation() {
    let eq = fixtures().join("sec23.eq");
    let sol = fixtures().join("sec23.sol");
    let o = run(&["verify", "--eq", path(&eq), "--solution", path(&sol), "--strictness"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!((v["H"].as_u64(), v["H_s"].as_u64()), (Some(4), Some(4)));
    assert_eq!(v["rhs"]["theorem_a"], 2);
    assert_eq!(v["rhs"]["theorem_b"], 1);
    assert_eq!(v["dicritical_steps"], serde_json::json!([2]));
}

#[test]
fn parse_polygon_and_expand() {
    let o = run(&["parse", "--text", "-3*x^2 + 2*y*y1"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["equation"], "-3*x^2 + 2*y*y1");
    assert_eq!(v["cloud"][0]["at"], serde_json::json!([-1, 1, 2]));

    let eq = fixtures().join("fig1.eq");
    let o = run(&["polygon", "--eq", path(&eq), "--mu", "1/2,1,2", "--series", "x"]);
    let v = json(&o);
    let tops: Vec<u64> = v["elements"].as_array().unwrap().iter().map(|e| e["top"].as_u64().unwrap()).collect();
    assert_eq!(tops, [4, 2, 2]);
    assert_eq!(v["height"], 4);
    assert_eq!(v["relative_height"], 2);

    let o = run(&["expand", "--text", "y^2 - x^3", "--order", "3"]);
    assert_eq!(code(&o), 0);
    let mut series: Vec<String> = json(&o).as_array().unwrap().iter().map(|j| j["series"].as_str().unwrap().to_string()).collect();
    series.sort();
    assert_eq!(series, ["-x^(3/2)", "x^(3/2)"]);
}

#[test]
fn q_root_selects_the_branch() {
    let o = run(&["--op", "q", "--q", "4", "--q-root", "2:-2", "trace", "--text", "-2*y - y1", "--series", "x^(1/2)"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["--op", "q", "--q", "4", "--q-root", "2:3", "parse", "--text", "y"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_and_computation_errors() {
    assert_eq!(code(&run(&["parse"])), 2);
    assert_eq!(code(&run(&["parse", "--text", "y +* x"])), 2);
    assert_eq!(code(&run(&["--op", "q", "parse", "--text", "y"])), 2);
    assert_eq!(code(&run(&["--backend", "numeric", "--precision", "100", "parse", "--text", "y"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["render", "--text", "y - x", "--format", "png"])), 2);
    // 2x is not a solution of y = x.
    assert_eq!(code(&run(&["trace", "--text", "y - x", "--series", "2*x"])), 1);
    assert_eq!(code(&run(&["verify", "--fixture", "/nonexistent/fixture.json"])), 2);
}
