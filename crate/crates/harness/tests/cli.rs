use std::path::Path;
use std::process::{Command, Output};

use aags_harness::{read_records, CSV_HEADER};

const BANDIT: &str = r#"{
    "env": {"bandit": {"arms": [[[0.0, 1.0]], [[1.0, 1.0]]]}},
    "algo": {"aags": {"horizon": 2}},
    "sweep": {"alphas": [0.5], "episodes": 1},
    "run": {"samples_per_step": 10, "seed": 3}
}"#;

const GRID: &str = r#"{
    "env": {"grid": {"width": 8, "height": 8}},
    "algo": {"aags": {"horizon": 6}},
    "sweep": {"alphas": [0.0, 1.0], "pairs": {"sampled": {"count": 3, "min_distance": 2}}, "episodes": 2},
    "run": {"samples_per_step": 20, "max_steps": 25, "seed": 11}
}"#;

fn plan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plan")).args(args).output().expect("plan binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn run_into(config: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--config", config, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    plan(&args)
}

#[test]
fn single_bandit_cell_gives_one_record_at_the_goal() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BANDIT);
    let out = dir.path().join("out");
    let o = run_into(&config, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let records = read_records(&out.join("records.csv")).unwrap();
    assert_eq!(records.len(), 1);
    assert!(records[0].reached_goal);
    assert_eq!(records[0].steps, 1);
    assert_eq!(records[0].discounted_return, 1.0);
    let text = std::fs::read_to_string(out.join("records.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    assert!(out.join("summary.json").exists() && out.join("metadata.json").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), GRID);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert!(run_into(&config, &a, &["--jobs", "1"]).status.success());
    assert!(run_into(&config, &b, &["--jobs", "1"]).status.success());
    assert!(run_into(&config, &c, &["--jobs", "3"]).status.success());
    for file in ["records.csv", "summary.json", "metadata.json"] {
        let first = std::fs::read(a.join(file)).unwrap();
        assert_eq!(first, std::fs::read(b.join(file)).unwrap(), "{file} differs between runs");
        assert_eq!(first, std::fs::read(c.join(file)).unwrap(), "{file} differs serial vs parallel");
    }
    assert_eq!(read_records(&a.join("records.csv")).unwrap().len(), 2 * 3 * 2);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), GRID);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run_into(&config, &a, &["--jobs", "1"]).status.success());
    assert!(run_into(&config, &b, &["--jobs", "1", "--seed", "12"]).status.success());
    assert_ne!(
        std::fs::read(a.join("records.csv")).unwrap(),
        std::fs::read(b.join("records.csv")).unwrap()
    );
}

#[test]
fn unknown_keys_are_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    for (bad, key) in [
        (BANDIT.replace("\"sweep\"", "\"sweeep\""), "sweeep"),
        (BANDIT.replace("\"horizon\"", "\"horizn\""), "horizn"),
        (BANDIT.replace("\"bandit\"", "\"maze\""), "maze"),
        (BANDIT.replace("\"aags\"", "\"gbop\""), "gbop"),
    ] {
        let config = write_config(dir.path(), &bad);
        let o = run_into(&config, &dir.path().join("out"), &[]);
        assert!(!o.status.success());
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(key), "error for {key} does not name it: {err}");
    }
}

#[test]
fn summarize_rebuilds_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), GRID);
    let out = dir.path().join("out");
    assert!(run_into(&config, &out, &["--jobs", "1"]).status.success());
    let written = std::fs::read(out.join("summary.json")).unwrap();
    std::fs::remove_file(out.join("summary.json")).unwrap();
    let o = plan(&["summarize", "--in", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(out.join("summary.json")).unwrap(), written);
}

#[test]
fn oracles_run_from_the_command_line() {
    let o = plan(&["oracle", "crossover"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("crossover: agree"));
    assert!(!plan(&["oracle", "nope"]).status.success());
}
