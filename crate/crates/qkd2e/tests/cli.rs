//! End-to-end runs of the `qkd2e` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qkd2e(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkd2e")).args(args).env_remove("QKD2E_SEED").output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = qkd2e(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn breidbart_run_writes_summary_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let args =
        ["simulate", "--protocol", "bb84x2", "--pairs", "100000", "--eve", "breidbart", "--eta", "1.0", "--seed", "7"];
    let status = qkd2e(&[&args[..], &["--out", out.to_str().unwrap()]].concat()).status;
    assert!(status.success());
    let summary: Value = serde_json::from_slice(&read(&out)).unwrap();
    for row in summary["rows"].as_array().unwrap().iter().filter(|r| r["dof"] != "xor") {
        let q = row["qber"].as_f64().unwrap();
        assert!((q - 0.25).abs() < 0.01, "{row}");
    }
    let log = read(&dir.path().join("run.jsonl"));
    assert_eq!(log.iter().filter(|&&b| b == b'\n').count(), 100_000);
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let s = qkd2e(&[
            "simulate",
            "--eve",
            "so4",
            "--eta",
            "0.5",
            "--pairs",
            "5000",
            "--seed",
            "3",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(s.status.success());
        (read(&out), read(&out.with_extension("jsonl")))
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn seed_falls_back_to_environment() {
    let with_env = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_qkd2e"))
            .args(["simulate", "--eve", "breidbart", "--pairs", "500"])
            .env("QKD2E_SEED", seed)
            .output()
            .unwrap()
            .stdout
    };
    let explicit = qkd2e(&["simulate", "--eve", "breidbart", "--pairs", "500", "--seed", "11"]).stdout;
    assert_eq!(with_env("11"), explicit);
    assert_ne!(with_env("12"), explicit);
}

#[test]
fn clean_channel_has_no_errors() {
    let v = json(&["simulate", "--eve", "none", "--pairs", "1000", "--seed", "1"]);
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row["qber"], 0.0);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(qkd2e(&["simulate", "--eta", "1.5"]).status.code(), Some(2));
    assert_eq!(qkd2e(&["simulate", "--channel", "triple"]).status.code(), Some(2));
    assert_eq!(qkd2e(&["wigner", "--angles", "0,30"]).status.code(), Some(2));
    assert_eq!(qkd2e(&["wigner", "--rel-uncertainty", "-1"]).status.code(), Some(2));
    assert_eq!(qkd2e(&["simulate", "--seed", "-3"]).status.code(), Some(2));
    assert_eq!(qkd2e(&[]).status.code(), Some(2));
    assert_eq!(qkd2e(&["--help"]).status.code(), Some(0));
    // Equal settings leave W with no slope in η: a runtime failure.
    let degenerate = qkd2e(&["wigner", "--angles", "0,0,0"]);
    assert_eq!(degenerate.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&degenerate.stderr).starts_with("error:"));
    // Unwritable output path.
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let bad = blocker.join("out.json");
    assert_eq!(qkd2e(&["paper-table", "--out", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn paper_table_rows_and_filter() {
    let v = json(&["paper-table"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let fixed = rows
        .iter()
        .find(|r| r["strategy"] == "fixed-basis" && r["channel"] == "double" && r["model"] == "cascade")
        .unwrap();
    assert!((fixed["I_AE"].as_f64().unwrap() - 0.0456).abs() < 1e-4);
    assert_eq!(fixed["paper_I_AE"], 0.046);
    let ratios = v["ratios"].as_array().unwrap();
    assert!((ratios[0]["ratio"].as_f64().unwrap() - 7.77).abs() < 0.01);
    assert_eq!(ratios[0]["paper_printed"], "7.7");
    assert!((ratios[1]["ratio"].as_f64().unwrap() - 3.17).abs() < 0.01);
    assert_eq!(ratios[1]["paper_printed"], "19/6");

    let csv = String::from_utf8(qkd2e(&["paper-table", "--model", "physical", "--format", "csv"]).stdout).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("strategy,channel,model,q1,p2,I_AE,q_AB,I_AB,"));
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 4);
    assert!(body.iter().all(|l| l.split(',').nth(2) == Some("physical")));
}

#[test]
fn paper_table_csv_writes_ratio_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    assert!(qkd2e(&["paper-table", "--format", "csv", "--out", out.to_str().unwrap()]).status.success());
    let ratios = String::from_utf8(read(&dir.path().join("t_ratios.csv"))).unwrap();
    assert!(ratios.starts_with("strategy,accounting,ratio,paper,paper_printed,deviation,note\n"));
    assert_eq!(ratios.lines().count(), 6);
}

#[test]
fn wigner_thresholds() {
    let v = json(&["wigner"]);
    assert!((v["thresholds"]["single"].as_f64().unwrap() - 0.0667).abs() < 1e-4);
    assert!((v["thresholds"]["double"].as_f64().unwrap() - 0.0471).abs() < 1e-4);
    let doubled = json(&["wigner", "--rel-uncertainty", "0.2"]);
    let ratio = doubled["thresholds"]["single"].as_f64().unwrap() / v["thresholds"]["single"].as_f64().unwrap();
    assert!((ratio - 2.0).abs() < 1e-12);

    let csv = String::from_utf8(qkd2e(&["wigner", "--format", "csv"]).stdout).unwrap();
    assert!(csv.starts_with("eta,W,stderr,detected\n"));
}

#[test]
fn wigner_simulation_near_minus_one_eighth() {
    let v = json(&["wigner", "--eta", "0", "--pairs", "1000000", "--seed", "2"]);
    let d = &v["monte_carlo"]["per_dof"][0];
    let (w, se) = (d["W"].as_f64().unwrap(), d["stderr"].as_f64().unwrap());
    assert!((w + 0.125).abs() < 4.0 * se, "{w} ± {se}");
}

#[test]
fn so4_small_and_repeatable() {
    let small = json(&["so4", "--pairs", "100", "--seed", "3", "--bootstrap", "200"]);
    assert!(small["ratio"].as_f64().is_some());
    let (lo, hi) = (small["ci_low"].as_f64().unwrap(), small["ci_high"].as_f64().unwrap());
    assert!(hi - lo > 0.1, "[{lo}, {hi}]");
    assert_eq!(small, json(&["so4", "--pairs", "100", "--seed", "3", "--bootstrap", "200"]));
}

#[test]
fn so4_ratio_at_default_size() {
    let v = json(&["so4", "--pairs", "200000", "--seed", "3", "--bootstrap", "100"]);
    let r = v["ratio"].as_f64().unwrap();
    assert!((1.15..=1.35).contains(&r), "{r}");
}

#[test]
fn ekert_simulation_reports_wigner() {
    let v = json(&[
        "simulate",
        "--protocol",
        "ekert-wigner",
        "--channel",
        "double",
        "--pairs",
        "20000",
        "--angles",
        "0,30,60",
    ]);
    let w = v["wigner"].as_array().unwrap();
    assert_eq!(w.len(), 2);
    for d in w {
        assert!(d["z"].as_f64().unwrap().abs() < 5.0, "{d}");
        assert_eq!(d["key_errors"], 0);
    }
}

#[test]
fn scenario_reports_pass() {
    for name in ["fixed-basis", "breidbart", "huttner-bound"] {
        let v = json(&["scenario", name]);
        assert_eq!(v["pass"], true, "{name}: {v:#}");
    }
}
