//! Every emitted document validates against the shipped schemas.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let raw: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    jsonschema::validator_for(&raw).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let v = schema(schema_name);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:#?}");
}

fn run(dir: &Path, args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_qkd2e")).args(args).current_dir(dir).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn load(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Parses a CSV cell the way a JSON consumer would; string columns stay
/// strings.
fn cell(s: &str, property: &Value) -> Value {
    let types = &property["type"];
    let allows = |t: &str| types == t || types.as_array().is_some_and(|a| a.iter().any(|x| x == t));
    if s.is_empty() && allows("null") {
        Value::Null
    } else if allows("string") {
        s.into()
    } else if s.is_empty() {
        Value::Null
    } else if let Ok(b) = s.parse::<bool>() {
        Value::Bool(b)
    } else if let Ok(n) = s.parse::<u64>() {
        n.into()
    } else if let Ok(x) = s.parse::<f64>() {
        x.into()
    } else {
        s.into()
    }
}

fn assert_csv_valid(schema_name: &str, path: &Path) {
    let raw: Value = load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(schema_name));
    let columns: Vec<&str> = raw["required"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header, columns, "{}", path.display());
    let mut n = 0;
    for record in reader.records() {
        let record = record.unwrap();
        let obj: serde_json::Map<String, Value> =
            header.iter().zip(record.iter()).map(|(h, c)| (h.clone(), cell(c, &raw["properties"][h]))).collect();
        assert_valid(schema_name, &Value::Object(obj));
        n += 1;
    }
    assert!(n > 0, "{} is empty", path.display());
}

fn tmp() -> (tempfile::TempDir, PathBuf) {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().to_path_buf();
    (d, p)
}

#[test]
fn simulate_outputs() {
    let (_d, dir) = tmp();
    run(&dir, &["simulate", "--eve", "fixed-basis", "--eta", "0.5", "--pairs", "2000", "--out", "run.json"]);
    assert_valid("simulate_report.schema.json", &load(&dir.join("run.json")));
    let log = std::fs::read_to_string(dir.join("run.jsonl")).unwrap();
    let v = schema("pair_record.schema.json");
    for line in log.lines() {
        assert!(v.is_valid(&serde_json::from_str(line).unwrap()), "{line}");
    }
    run(
        &dir,
        &[
            "simulate",
            "--channel",
            "single-phase",
            "--eve",
            "so4",
            "--pairs",
            "500",
            "--out",
            "run.csv",
            "--format",
            "csv",
        ],
    );
    assert_csv_valid("qber_row.schema.json", &dir.join("run.csv"));
    run(
        &dir,
        &[
            "simulate",
            "--protocol",
            "ekert-wigner",
            "--eve",
            "breidbart",
            "--eta",
            "0.3",
            "--pairs",
            "3000",
            "--out",
            "ek.json",
        ],
    );
    assert_valid("simulate_report.schema.json", &load(&dir.join("ek.json")));
}

#[test]
fn analytic_outputs() {
    let (_d, dir) = tmp();
    run(&dir, &["paper-table", "--out", "t.json"]);
    assert_valid("paper_table.schema.json", &load(&dir.join("t.json")));
    run(&dir, &["paper-table", "--format", "csv", "--out", "t.csv"]);
    assert_csv_valid("paper_table_row.schema.json", &dir.join("t.csv"));
    assert_csv_valid("ratio_row.schema.json", &dir.join("t_ratios.csv"));
    run(&dir, &["wigner", "--pairs", "5000", "--eta", "0.1", "--channel", "double", "--out", "w.json"]);
    assert_valid("wigner_report.schema.json", &load(&dir.join("w.json")));
    run(&dir, &["wigner", "--pairs", "5000", "--format", "csv", "--out", "w.csv"]);
    assert_csv_valid("sweep_row.schema.json", &dir.join("w.csv"));
}

#[test]
fn so4_and_scenario_outputs() {
    let (_d, dir) = tmp();
    run(&dir, &["so4", "--pairs", "300", "--bootstrap", "20", "--out", "s.json"]);
    assert_valid("so4_report.schema.json", &load(&dir.join("s.json")));
    run(&dir, &["so4", "--pairs", "300", "--bootstrap", "20", "--format", "csv", "--out", "s.csv"]);
    assert_csv_valid("so4_arm_row.schema.json", &dir.join("s.csv"));
    for name in ["fixed-basis", "breidbart", "wigner-threshold", "so4-ratio", "huttner-bound"] {
        let file = format!("{name}.json");
        run(&dir, &["scenario", name, "--pairs", "2000", "--out", &file]);
        assert_valid("scenario_report.schema.json", &load(&dir.join(&file)));
    }
}

#[test]
fn reproduce_tree() {
    let (_d, dir) = tmp();
    let out = Command::new(env!("CARGO_BIN_EXE_qkd2e"))
        .args(["reproduce", "--out-dir", "r", "--seed", "5"])
        .current_dir(&dir)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let root = dir.join("r");
    let manifest = load(&root.join("manifest.json"));
    assert_valid("run_manifest.schema.json", &manifest);
    assert_eq!(manifest["timestamp"], 1_700_000_000u64);
    for spec in manifest["scenarios"].as_array().unwrap() {
        let path = root.join(spec["output_path"].as_str().unwrap());
        assert!(path.exists(), "{}", path.display());
    }
    for name in ["fixed_basis", "breidbart", "wigner_threshold", "so4_ratio", "huttner_bound"] {
        let report = load(&root.join(format!("scenario_{name}.json")));
        assert_valid("scenario_report.schema.json", &report);
        assert_eq!(report["pass"], true, "{name}");
    }
    let m: qkd2e::manifest::RunManifest = serde_json::from_value(manifest.clone()).unwrap();
    assert_eq!(serde_json::to_value(&m).unwrap(), manifest);
}
