//! End-to-end checks of the `dbp` binary: report shapes, exit codes, and
//! campaign determinism through the real process boundary.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn dbp(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn dbp")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const CUBE: &str = r#"{
  "n": 1, "m": 1, "q": 1, "p": 2,
  "C": [[2]], "A": [[1]], "a": [1],
  "g": [-1], "e": [1],
  "D": [[1], [-1]], "d": [1, 0]
}"#;

#[test]
fn solve_reports_exact_optimum() {
    let tmp = TempDir::new().unwrap();
    let file = write(tmp.path(), "cube.dbp", CUBE);
    let out = dbp(&["solve", &file], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["h_star"], "-1");
    assert_eq!(report["mode"], "bisection");
    assert_eq!(report["discrepancy"], serde_json::Value::Null);
}

#[test]
fn solve_rejects_empty_x_with_exit_2() {
    let tmp = TempDir::new().unwrap();
    let file = write(tmp.path(), "bad.dbp", &CUBE.replace("\"a\": [1]", "\"a\": [-1]"));
    let out = dbp(&["solve", &file], tmp.path());
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn parse_errors_exit_1_with_position() {
    let tmp = TempDir::new().unwrap();
    let file = write(tmp.path(), "broken.dbp", "{ \"n\": 1, ");
    let out = dbp(&["solve", &file], tmp.path());
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line") && msg.contains("column"), "{msg}");

    let out = dbp(&["bogus-subcommand"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_subset_verdicts() {
    let tmp = TempDir::new().unwrap();
    let file = write(tmp.path(), "cube.dbp", CUBE);
    let out = dbp(&["check-subset", &file, "--h", "100/1"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "NotSubset");

    let out = dbp(&["check-subset", &file, "--h", "-100"], tmp.path());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "Subset");

    let out = dbp(&["check-subset", &file, "--h", "nonsense"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_perfect_reports_violations() {
    let tmp = TempDir::new().unwrap();
    let file = write(tmp.path(), "cube.dbp", CUBE);
    let out = dbp(&["check-perfect", &file], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["is_perfect"], true);

    // duplicated facet row
    let bad = CUBE
        .replace("\"D\": [[1], [-1]]", "\"D\": [[1], [1], [-1]]")
        .replace("\"d\": [1, 0]", "\"d\": [1, 1, 0]")
        .replace("\"p\": 2", "\"p\": 3");
    let file = write(tmp.path(), "dup.dbp", &bad);
    let out = dbp(&["check-perfect", &file], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["is_perfect"], false);
}

#[test]
fn reduce_writes_instances_that_solve() {
    let tmp = TempDir::new().unwrap();
    let boolean = write(
        tmp.path(),
        "sys.json",
        r#"{"kind": "boolean", "n": 1, "A": [[-2]], "a": [-2]}"#,
    );
    let out_path = tmp.path().join("reduced.dbp");
    let out = dbp(
        &["reduce", "boolean", &boolean, "-o", out_path.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let solved = dbp(&["solve", out_path.to_str().unwrap()], tmp.path());
    assert_eq!(solved.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&solved.stdout).unwrap();
    assert_eq!(report["z_check"], "0");

    // kind mismatch is a usage error
    let out = dbp(&["reduce", "plcp", &boolean], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_and_duality_reports() {
    let tmp = TempDir::new().unwrap();
    let file = write(tmp.path(), "cube.dbp", CUBE);
    let out = dbp(&["oracle", &file], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["z_star"], "-1");

    let out = dbp(&["duality", &file], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn fuzz_is_deterministic_and_writes_reproducers() {
    let tmp = TempDir::new().unwrap();
    let config = write(
        tmp.path(),
        "campaign.json",
        r#"{
            "seed": 11,
            "count": 4,
            "dims": {"n": [1, 2], "m": [1, 2], "q": [1, 1]},
            "coefficient_bound": 2,
            "family": "boolean",
            "h_probes_per_instance": 0
        }"#,
    );
    let out_a = tmp.path().join("artifacts-a");
    let out_b = tmp.path().join("artifacts-b");
    let run_a = dbp(
        &["fuzz", "--config", &config, "--out", out_a.to_str().unwrap()],
        tmp.path(),
    );
    let run_b = dbp(
        &["fuzz", "--config", &config, "--out", out_b.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(run_a.stdout, run_b.stdout, "campaign not deterministic");
    assert!(matches!(run_a.status.code(), Some(0) | Some(3)));
    let report: serde_json::Value = serde_json::from_slice(&run_a.stdout).unwrap();
    let files = report["discrepancy_files"].as_array().unwrap();
    let expect = if files.is_empty() { 0 } else { 3 };
    assert_eq!(run_a.status.code(), Some(expect));
    for f in files {
        assert!(out_a.join(f.as_str().unwrap()).exists());
    }
}
