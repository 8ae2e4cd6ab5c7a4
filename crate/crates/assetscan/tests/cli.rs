// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use assetscan::config_to_toml;
use assetscan::report::canonical_json;
use assetscan_core::config::builtin_config;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_assetscan")).args(args).output().expect("binary runs")
}

fn splitter() -> String {
    fixtures().join("data_splitter").display().to_string()
}

#[test]
fn splitter_json_report() {
    let out = run(&["--rtl-dir", &splitter(), "--top", "data_splitter", "--family", "crypto"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    let report = &v["reports"][0];
    assert_eq!(report["top_module"], "data_splitter");
    assert_eq!(report["corpus_stats"]["signal_count"], 14);
    let roots: Vec<&str> = report["assets"].as_array().unwrap().iter().map(|a| a["root"]["name"].as_str().unwrap()).collect();
    assert_eq!(roots, ["bank0", "bank1", "bank2", "bank3", "bank_selector", "data", "done", "load"]);
}

#[test]
fn json_round_trips_byte_for_byte() {
    let out = run(&["--rtl-dir", &fixtures().join("corpus/xtea").display().to_string()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(canonical_json(v).unwrap(), text);
}

#[test]
fn repeated_runs_are_identical() {
    let dir = fixtures().join("corpus/uart").display().to_string();
    for format in ["json", "csv", "text"] {
        let a = run(&["--rtl-dir", &dir, "--family", "peripheral", "--format", format]);
        let b = run(&["--rtl-dir", &dir, "--family", "peripheral", "--format", format]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
}

#[test]
fn exit_codes() {
    let empty = tempfile::tempdir().unwrap();
    let empty_dir = empty.path().display().to_string();
    assert_eq!(run(&["--rtl-dir", &empty_dir]).status.code(), Some(2));
    assert_eq!(run(&["--rtl-dir", &format!("{empty_dir}/missing")]).status.code(), Some(2));
    fs::write(empty.path().join("comment.v"), "// nothing here\n").unwrap();
    assert_eq!(run(&["--rtl-dir", &empty_dir]).status.code(), Some(2));

    let unknown = run(&["--rtl-dir", &splitter(), "--top", "nope"]);
    assert_eq!(unknown.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("data_splitter"));

    assert_eq!(run(&["--rtl-dir", &splitter(), "--family", "dsp"]).status.code(), Some(4));
    let bad = tempfile::NamedTempFile::new().unwrap();
    fs::write(bad.path(), "version = 1\nfamily = \"crypto\"\n").unwrap();
    let out = run(&["--rtl-dir", &splitter(), "--config", &bad.path().display().to_string()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("groups"));

    let truth = tempfile::NamedTempFile::new().unwrap();
    fs::write(truth.path(), "module,signal,is_asset\nm,a,1\nm,a,0\n").unwrap();
    let out = run(&["--rtl-dir", &splitter(), "--ground-truth", &truth.path().display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:"));

    assert_eq!(run(&["--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn ground_truth_scores_splitter_perfectly() {
    let truth = fixtures().join("data_splitter/truth.csv").display().to_string();
    let out = run(&["--rtl-dir", &splitter(), "--ground-truth", &truth]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let ev = &v["reports"][0]["evaluation"];
    assert_eq!(ev["accuracy"], 1.0);
    assert_eq!(ev["f1"], 1.0);
    assert_eq!(ev["tp"], 8);
    assert_eq!(ev["tn"], 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("pred+"));
}

#[test]
fn saved_config_reproduces_builtin_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gpio.toml");
    fs::write(&cfg, config_to_toml(&builtin_config("gpio").unwrap()).unwrap()).unwrap();
    let rtl = fixtures().join("corpus/gpio").display().to_string();
    let a = run(&["--rtl-dir", &rtl, "--family", "gpio"]);
    let b = run(&["--rtl-dir", &rtl, "--config", &cfg.display().to_string()]);
    let c = run(&["--rtl-dir", &rtl, "--family", &cfg.display().to_string()]);
    assert!(a.status.success() && b.status.success() && c.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn stats_and_csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.csv");
    let report = dir.path().join("report.csv");
    let out = run(&[
        "--rtl-dir",
        &splitter(),
        "--format",
        "csv",
        "--out",
        &report.display().to_string(),
        "--stats",
        &stats.display().to_string(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let stats = fs::read_to_string(stats).unwrap();
    assert!(stats.starts_with("group,count\n"));
    assert!(stats.lines().any(|l| l == "data,2"));
    let mut rdr = csv::Reader::from_path(report).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), assetscan::report::CSV_HEADER);
    assert_eq!(rdr.records().count(), 8);
}

#[test]
fn single_file_and_text_format() {
    let file = fixtures().join("data_splitter/data_splitter.v").display().to_string();
    let out = run(&["--rtl-dir", &file, "--format", "text", "--verbose"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("assets (8):"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("extraction 14"));
}
