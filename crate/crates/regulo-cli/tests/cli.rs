//! Black-box tests of the installed binary: exit codes, report shapes,
//! stream separation, and the checkpoint/resume flow.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn regulo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regulo"))
        .args(args)
        .env_remove("REGULO_CHECKPOINT_DIR")
        .output()
        .expect("spawn binary")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

/// Report bytes with the volatile timestamp line blanked.
fn stable_bytes(raw: &[u8]) -> Vec<u8> {
    let text = String::from_utf8(raw.to_vec()).expect("utf8 report");
    text.lines()
        .filter(|l| !l.contains("generated_at_unix"))
        .collect::<Vec<_>>()
        .join("\n")
        .into_bytes()
}

#[test]
fn verified_family_exits_zero_with_certificate() {
    let out = regulo(&["verify", "--k", "5", "--m0", "0", "--m-max", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let cert = stdout_json(&out);
    assert_eq!(cert["kind"], "verification-certificate");
    assert_eq!(cert["status"], "verified");
    assert_eq!(cert["threshold_m_max"], 3);
    assert_eq!(cert["levels"].as_array().expect("levels").len(), 3);
    assert!(cert["witness"].is_null());
}

#[test]
fn refuted_family_exits_one_with_witness() {
    let out = regulo(&["verify", "--k", "8", "--m0", "0", "--m-max", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let cert = stdout_json(&out);
    assert_eq!(cert["status"], "refuted");
    assert_eq!(cert["witness"]["m"], 1);
    assert_eq!(cert["witness"]["n"], 56);
    assert_eq!(cert["witness"]["previous"], "369");
    assert_eq!(cert["witness"]["current"], "368");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("refuted at m = 1, n = 56"), "stderr: {err}");
}

#[test]
fn operational_failures_exit_two() {
    let unsupported = regulo(&["verify", "--k", "3", "--m0", "0"]);
    assert_eq!(unsupported.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unsupported.stderr).contains("error:"));

    let tiny_memory = regulo(&["build", "--k", "4", "--m", "1", "--memory-limit", "32"]);
    assert_eq!(tiny_memory.status.code(), Some(2));

    let missing_weight = regulo(&["oracle", "--k", "4", "--m", "1"]);
    assert_eq!(missing_weight.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing_weight.stderr).contains("--n"));
}

#[test]
fn certificates_are_deterministic_apart_from_timestamp() {
    let first = regulo(&["verify", "--k", "6", "--m0", "0", "--m-max", "4"]);
    let second = regulo(&["verify", "--k", "6", "--m0", "0", "--m-max", "4"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(stable_bytes(&first.stdout), stable_bytes(&second.stdout));
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().expect("tempdir");
    let ckpt = dir.path().to_str().expect("utf8 path");
    let head = regulo(&[
        "verify", "--k", "5", "--m0", "0", "--m-max", "3", "--checkpoint-dir", ckpt,
    ]);
    assert_eq!(head.status.code(), Some(0));
    assert!(dir.path().join("regulo-k5-m00.ckpt").is_file());
    assert!(dir.path().join("regulo-k5-m00.partial.json").is_file());

    let resumed = regulo(&[
        "verify", "--k", "5", "--m0", "0", "--m-max", "8", "--checkpoint-dir", ckpt, "--resume",
    ]);
    assert_eq!(resumed.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&resumed.stderr).contains("resuming"));

    let uninterrupted = regulo(&["verify", "--k", "5", "--m0", "0", "--m-max", "8"]);
    assert_eq!(
        stable_bytes(&resumed.stdout),
        stable_bytes(&uninterrupted.stdout)
    );
}

#[test]
fn checkpoint_dir_flows_from_environment() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = Command::new(env!("CARGO_BIN_EXE_regulo"))
        .args(["verify", "--k", "5", "--m0", "0", "--m-max", "2"])
        .env("REGULO_CHECKPOINT_DIR", dir.path())
        .output()
        .expect("spawn binary");
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("regulo-k5-m00.ckpt").is_file());
}

#[test]
fn oracle_lists_partitions_in_order() {
    let out = regulo(&["oracle", "--k", "4", "--m", "1", "--n", "10"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "4\n(7,3)\n(7,2,1)\n(6,3,1)\n(5,3,2)\n"
    );
}

#[test]
fn oracle_table_modes_agree() {
    let dp = regulo(&["oracle", "--k", "5", "--m", "1", "--table"]);
    let pure = regulo(&["oracle", "--k", "5", "--m", "1", "--table", "--mode", "pure"]);
    assert_eq!(dp.status.code(), Some(0));
    assert_eq!(dp.stdout, pure.stdout);
    let lines = String::from_utf8_lossy(&dp.stdout).lines().count();
    assert_eq!(lines, 41);
}

#[test]
fn oracle_respects_enumeration_cap() {
    let out = regulo(&[
        "oracle", "--k", "6", "--m", "2", "--n", "60", "--enum-cap", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("listing suppressed"));
}

#[test]
fn profile_sweep_reports_expected_violations() {
    let out = regulo(&["k4-profile", "--m-max", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["kind"], "k4-exception-profile");
    assert_eq!(report["all_match"], true);
    assert_eq!(report["rows"].as_array().expect("rows").len(), 4);
    assert!(report["windows_at_64"].is_null());
}

#[test]
fn recurrence_check_passes() {
    let single = regulo(&["recurrence", "--k", "4", "--m", "2", "--n", "17"]);
    assert_eq!(single.status.code(), Some(0));
    assert_eq!(stdout_json(&single)["holds"], true);

    let sweep = regulo(&["recurrence", "--k", "5", "--m", "1", "--general"]);
    assert_eq!(sweep.status.code(), Some(0));
    let report = stdout_json(&sweep);
    assert_eq!(report["kind"], "recurrence-check");
    assert_eq!(report["first_failure"], Value::Null);
}

#[test]
fn audit_smoke_run_passes() {
    let out = regulo(&[
        "audit",
        "--m",
        "64",
        "--mu-samples",
        "2",
        "--theta-samples",
        "12",
        "--x-samples",
        "10",
        "--n-samples",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["kind"], "analytic-audit");
    assert_eq!(report["all_passed"], true);
    assert_eq!(report["bounds"][0]["evidence"], "numerical spot-check");
}

#[test]
fn build_writes_summary_and_checkpoint() {
    let dir = tempfile::tempdir().expect("tempdir");
    let json_path = dir.path().join("summary.json");
    let out = regulo(&[
        "build",
        "--k",
        "4",
        "--m",
        "2",
        "--checkpoint-dir",
        dir.path().to_str().expect("utf8 path"),
        "--output",
        json_path.to_str().expect("utf8 path"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let summary: Value =
        serde_json::from_slice(&std::fs::read(&json_path).expect("summary file")).expect("json");
    assert_eq!(summary["degree"], 54);
    assert_eq!(summary["coefficient_sum"], "512");
    assert!(Path::new(summary["checkpoint"].as_str().expect("path")).is_file());
}

#[test]
fn corollary_preset_writes_certificates() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = regulo(&[
        "certify-corollaries",
        "--only",
        "5",
        "--output-dir",
        dir.path().to_str().expect("utf8 path"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary = stdout_json(&out);
    assert_eq!(summary["all_verified"], true);
    let jobs = summary["jobs"].as_array().expect("jobs");
    assert_eq!(jobs.len(), 1);
    assert_eq!(jobs[0]["k"], 5);
    assert_eq!(jobs[0]["threshold_m_max"], 89);
    let cert_path = dir.path().join("regulo-certificate-k5-m00.json");
    let cert: Value =
        serde_json::from_slice(&std::fs::read(&cert_path).expect("certificate")).expect("json");
    assert_eq!(cert["status"], "verified");
    assert_eq!(cert["levels"].as_array().expect("levels").len(), 89);
}
