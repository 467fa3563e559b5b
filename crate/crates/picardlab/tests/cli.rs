use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn picardlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_picardlab"))
        .args(args)
        .env_remove("PICARDLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &std::path::Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn run_standard_interval() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("run.json");
    let o = picardlab(&["run", data("standard.json").to_str().unwrap(), "--json", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("outcome: global picard"));
    let v = read_json(&report);
    assert_eq!(v["theorem"], "t3");
    let z = v["fixed_point"].as_f64().unwrap();
    assert!((z - 1.0).abs() < 1e-8);
    assert!(v["trace"]["iterations"].as_u64().unwrap() <= 40);
}

#[test]
fn theorem_flag_overrides_file() {
    let o = picardlab(&["run", data("standard.json").to_str().unwrap(), "--theorem", "t4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("pipeline t4"));
    let o = picardlab(&["run", data("standard.json").to_str().unwrap(), "--theorem", "t9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_generalized_certificate() {
    let o = picardlab(&["run", data("sp_half.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("unique-limit"));
}

#[test]
fn rejected_instance_exits_one() {
    let o = picardlab(&["run", data("chain5.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("rejected at contraction"));
}

#[test]
fn validate_reports_triangle_witness() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("v.json");
    let o = picardlab(&["validate", data("broken_triangle.json").to_str().unwrap(), "--json", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("Triangle at [0, 1, 2]"));
    let v = read_json(&report);
    assert_eq!(v["violations"][0]["axiom"], "triangle");
    assert_eq!(v["violations"][0]["witness"], serde_json::json!([0, 1, 2]));
}

#[test]
fn malformed_json_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"points\": 2,\n  \"dist\": [[\"0\", \"1\"],\n}\n").unwrap();
    let o = picardlab(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.json:4:"), "{}", stderr(&o));

    let o = picardlab(&["validate", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_agrees_on_chain() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("o.json");
    let o = picardlab(&["oracle", data("chain5.json").to_str().unwrap(), "--json", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = read_json(&report);
    assert_eq!(v["agreement"]["agree"], true);
    assert_eq!(v["oracle"]["fixed_points"], serde_json::json!([2, 3]));
    assert_eq!(v["oracle"]["hypotheses_hold"], false);
}

#[test]
fn oracle_needs_finite_space() {
    let o = picardlab(&["oracle", data("standard.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_cert_linear_psi() {
    let o = picardlab(&["check-cert", data("psi_half.json").to_str().unwrap(), "--trials", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for name in ["boyd-wong-admissible", "compatible", "normal-34", "4-point-lim-positive"] {
        assert!(stdout(&o).contains(name));
    }
}

#[test]
fn fuzz_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let o = picardlab(&["fuzz", "--n", "8", "--count", "40", "--seed", "11", "--json", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let p = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_picardlab"))
            .args(["fuzz", "--n", "6", "--count", "5", "--json", p.to_str().unwrap()])
            .env("PICARDLAB_SEED", seed)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        read_json(&p)
    };
    let v = run("99", "e.json");
    assert_eq!(v["config"]["seed"], 99);
    let w = run("99", "f.json");
    assert_eq!(v, w);
    assert_ne!(run("100", "g.json")["cases"], v["cases"]);
}

#[test]
fn fuzz_rejects_large_n() {
    let o = picardlab(&["fuzz", "--n", "21", "--count", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn extract_gap_on_walk_and_geometric() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("g.json");
    let o = picardlab(&[
        "extract-gap",
        data("walk.json").to_str().unwrap(),
        "--theta",
        "0.3",
        "--tail-tol",
        "0.05",
        "--json",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = read_json(&report);
    assert_eq!(v["outcome"]["kind"], "gap");
    assert_eq!(v["outcome"]["b"], 0.3);

    let o = picardlab(&["extract-gap", data("geometric.json").to_str().unwrap(), "--theta", "0.5,0.1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("no gap"));
}

#[test]
fn extract_gap_screens_non_semi_cauchy() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("alt.json");
    let points: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
    std::fs::write(&seq, serde_json::json!({"kind": "explicit", "points": points}).to_string()).unwrap();
    let o = picardlab(&["extract-gap", seq.to_str().unwrap(), "--theta", "0.3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not semi-Cauchy"));
}
