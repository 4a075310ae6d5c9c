use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tmcnot"))
}

fn default_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn hom_reports_coincidence() {
    let v = json(&run(&["hom", "--visibility", "0.98"]));
    assert!((v["coincidence"].as_f64().unwrap() - 0.01).abs() < 1e-12);
    assert_eq!(v["visibility"].as_f64().unwrap(), 0.98);
}

#[test]
fn ideal_truth_table() {
    let v = json(&run(&["truth-table", "--ideal"]));
    for i in 0..4 {
        for o in 0..4 {
            let want = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0]][i][o];
            assert!((v["table"]["probs"][i][o].as_f64().unwrap() - want).abs() < 1e-10);
        }
        assert!((v["table"]["success"][i].as_f64().unwrap() - 1.0 / 9.0).abs() < 1e-10);
    }
    assert_eq!(v["gate_fidelity"].as_f64().unwrap(), 1.0);
}

#[test]
fn error_budget_outputs() {
    let cfg = default_config();
    let cfg = cfg.to_str().unwrap();
    let v = json(&run(&["error-budget", "--config", cfg]));
    let f = v["f_max"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&f));
    assert_eq!(v["p_cnot"].as_array().unwrap().len(), 4);
    assert_eq!(v["discrepancies"].as_array().unwrap().len(), 24);
    assert_eq!(v["reference_f_max"].as_f64().unwrap(), 0.955);

    let out = run(&["error-budget", "--config", cfg, "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("input,n,dist,correct,error"));
    assert_eq!(lines.count(), 12);
}

#[test]
fn bell_all_inputs() {
    let v = json(&run(&["bell", "--ideal"]));
    let runs = v.as_array().unwrap();
    let targets: Vec<&str> = runs.iter().map(|r| r["run"]["target"].as_str().unwrap()).collect();
    assert_eq!(targets, ["PhiMinus", "PsiMinus", "PhiPlus", "PsiPlus"]);
    for r in runs {
        assert!((r["run"]["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
        assert!((r["pattern_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn compile_reports_equivalence_for_transparent_gate() {
    let v = json(&run(&["compile", "--transparent"]));
    assert!(v["equivalence_residual"].as_f64().unwrap() < 1e-9);
    let v = json(&run(&["compile", "--input", "10", "--bell", "--separation"]));
    assert!(v["equivalence_residual"].is_null());
    let tags: Vec<&str> =
        v["schedule"]["rounds"].as_array().unwrap().iter().map(|r| r["tag"].as_str().unwrap()).collect();
    assert!(tags.contains(&"hadamard-variant") && tags.last() == Some(&"separation"));
}

#[test]
fn simulate_single_input() {
    let v = json(&run(&["simulate", "--input", "11", "--ideal", "--path"]));
    assert_eq!(v["expected_output"], "10");
    assert!((v["probs"][2].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn tomo_is_reproducible_and_roundtrips_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&["tomo", "--input", "01", "--shots", "400", "--seed", "5"]);
    let b = run(&["tomo", "--input", "01", "--shots", "400", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(v["fidelity"].as_f64().unwrap() > 0.9);
    assert!(v["interval"]["lower"].as_f64().unwrap() <= v["interval"]["upper"].as_f64().unwrap());

    let counts = dir.path().join("counts.csv");
    let out = run(&["tomo", "--input", "01", "--shots", "400", "--seed", "5", "--format", "csv", "--out", counts.to_str().unwrap()]);
    assert!(out.status.success());
    let from_file = json(&run(&["tomo", "--input", "01", "--counts", counts.to_str().unwrap(), "--seed", "5"]));
    assert_eq!(from_file["fidelity"], v["fidelity"]);
}

#[test]
fn exact_tomography_has_no_interval() {
    let v = json(&run(&["tomo", "--ideal"]));
    assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(v["interval"].is_null());
}

#[test]
fn identical_seeds_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = default_config();
    let mut bodies = Vec::new();
    for name in ["a.json", "b.json"] {
        let p = dir.path().join(name);
        let out = run(&["truth-table", "--config", cfg.to_str().unwrap(), "--seed", "9", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
        bodies.push(std::fs::read(p).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["hom", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["simulate", "--input", "2"]).status.code(), Some(1));
    assert_eq!(run(&["hom", "--visibility", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["hom", "--config", "/no/such/file.json"]).status.code(), Some(2));
    assert_eq!(run(&["hom", "--out", "/no/such/dir/out.json"]).status.code(), Some(2));
    assert_eq!(run(&["tomo", "--counts", "/no/such/counts.csv"]).status.code(), Some(2));
}

#[test]
fn invalid_config_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"efficiency": {"readout_flip": -0.1}}"#).unwrap();
    let out = run(&["hom", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    std::fs::write(&p, "{ not json").unwrap();
    assert_eq!(run(&["hom", "--config", p.to_str().unwrap()]).status.code(), Some(1));
}
