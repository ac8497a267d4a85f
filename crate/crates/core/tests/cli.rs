use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_degenbif"))
}

fn model(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/models").join(name).display().to_string()
}

#[test]
fn discriminant_eval_prints_json_lines() {
    let out = bin().args(["discriminant", "eval", "--m", "2", "--params", "2,1,-4", "--params", "1,0,1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["on_discriminant"], true);
    assert_eq!(lines[1]["resultant"], 1.0);
}

#[test]
fn branch_points_csv_from_a_reduced_model() {
    let out = bin().args(["--format", "csv", "branch-points", "--model", &model("example1.json")]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let xs: Vec<f64> = rdr.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(xs.len(), 2);
    assert!(xs[0].abs() < 1e-8 && (xs[1] - std::f64::consts::PI).abs() < 1e-8);
}

#[test]
fn out_flag_writes_a_file() {
    let path = std::env::temp_dir().join(format!("degenbif_cli_{}.json", std::process::id()));
    let status = bin()
        .args(["--out", path.to_str().unwrap(), "classify", "--model", &model("circle_m2.json")])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
    std::fs::remove_file(path).ok();
}

#[test]
fn errors_and_hypothesis_violations_have_distinct_codes() {
    let missing = bin().args(["count", "--model", "/no/such/model.json", "--eps", "0"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    let flat = bin().args(["chemnet", "--rate", "(x1-1)^3", "--no-pipeline"]).output().unwrap();
    assert_eq!(flat.status.code(), Some(2));
}
