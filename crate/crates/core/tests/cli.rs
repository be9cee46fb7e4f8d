use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn fairthresh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairthresh")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn verify_passes_on_s1() {
    let out = fairthresh(&["verify", "--config", fixture("s1.toml").to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS solver_vs_oracle"));
}

#[test]
fn negative_tolerance_makes_verify_fail() {
    let out = fairthresh(&["verify", "--config", fixture("s1.toml").to_str().unwrap(), "--tolerance", "-1"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL solver_vs_oracle"));
}

#[test]
fn missing_config_is_a_config_error() {
    let out = fairthresh(&["solve", "--config", "/nonexistent/problem.toml"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn unknown_criterion_is_a_config_error() {
    let out = fairthresh(&["solve", "--config", fixture("s1.toml").to_str().unwrap(), "--criterion", "fastest"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn decreasing_utility_is_a_precondition_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        r#"
share_a = 0.5
criteria = ["demparity"]
[grid]
size = 3
[group_a]
pmf = [0.5, 0.3, 0.2]
repay_prob = [0.25, 0.5, 0.75]
[group_b]
pmf = [0.2, 0.3, 0.5]
repay_prob = [0.25, 0.5, 0.75]
[utility]
kind = "table"
values = [1.0, 0.0, -1.0]
[outcome]
kind = "affine"
gain = 2.0
penalty = -1.0
"#,
    );
    let out = fairthresh(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn ingest_check_rejects_a_gap_in_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "gap.csv", "score,group,pmf,repay_prob\n1,A,0.5,0.2\n2,A,0.25,0.5\n4,A,0.25,0.7\n");
    let out = fairthresh(&["ingest-check", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing score between 2 and 4"));
}

#[test]
fn ingest_check_echoes_the_credit_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = fairthresh(&[
        "ingest-check",
        "--config",
        fixture("credit_like.toml").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let echoed = std::fs::read_to_string(dir.path().join("ingested.csv")).unwrap();
    assert_eq!(echoed.lines().count(), 113);
}

#[test]
fn solve_csv_matches_between_stdout_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = fairthresh(&[
        "solve",
        "--config",
        fixture("two_point.toml").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0);
    let file = std::fs::read(dir.path().join("solve.csv")).unwrap();
    assert_eq!(file, out.stdout);
}
