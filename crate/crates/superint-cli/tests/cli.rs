//! End-to-end tests of the `superint` binary: exit codes, report
//! determinism, flag/config precedence, and diff behavior.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_superint"))
}

/// Unique scratch path per test (tests share one process but not names).
fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("superint-cli-{}-{name}", std::process::id()))
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("process terminated by signal")
}

#[test]
fn verify_single_system_all_green() {
    let out = bin()
        .args(["verify", "--system", "ttw", "-p", "1", "-q", "1"])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let report: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["schema_version"], "1");
    assert_eq!(report["all_verified"], true);
    assert_eq!(report["jobs"][0]["system"], "TTW");
    // The oscillator-family job carries the exchange-map section and a
    // representation sweep.
    assert!(report["jobs"][0]["structure"]["stackel"].is_object());
    assert!(report["jobs"][0]["reps"]["all_verified"].as_bool().unwrap());
    assert_eq!(report["numerics"][0]["all_pass"], true);
}

#[test]
fn verify_caged_oscillator_all_green() {
    let out = bin()
        .args(["verify", "--system", "caged", "-p", "1", "-q", "1"])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let report: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["all_verified"], true);
    assert_eq!(report["jobs"][0]["system"], "CagedOscillator");
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let (a, b) = (tmp("det-a.json"), tmp("det-b.json"));
    for (path, jobs) in [(&a, "1"), (&b, "4")] {
        let out = bin()
            .args(["verify", "--system", "sphere,ce", "-p", "1", "-q", "1"])
            .args(["--jobs", jobs, "--out", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    }
    let (ja, jb) = (
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
    );
    assert!(!ja.is_empty());
    assert_eq!(ja, jb, "same configuration must serialize identically");
}

#[test]
fn rep_with_explicit_parameters_matches_contract_example() {
    let out = bin()
        .args(["rep", "--system", "ttw", "-p", "1", "-q", "2", "-M", "2"])
        .args(["--a", "1/3", "--b", "1/5", "--omega", "1"])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let report: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["system"], "TTW");
    assert_eq!(report["check"]["all_verified"], true);
    let params: Vec<&str> = report["params"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["name"].as_str().unwrap())
        .collect();
    assert_eq!(params, ["a", "b", "om"]);
}

#[test]
fn rep_csv_emits_spectrum_table() {
    let out = bin()
        .args(["rep", "--system", "caged", "--mu", "1", "--a1", "1/4"])
        .args(["--a2", "3/4", "--csv"])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("N,"), "header: {header}");
    assert!(lines.count() >= 2, "spectrum rows expected");
}

#[test]
fn rep_missing_parameter_is_a_config_error() {
    let out = bin()
        .args(["rep", "--system", "ttw", "--a", "1/3"])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 2);
    assert!(
        stderr_of(&out).contains("missing parameter"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn non_coprime_order_is_rejected_with_exit_2() {
    let out = bin()
        .args(["verify", "--system", "sphere", "-p", "2", "-q", "2"])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 2);
    assert!(stderr_of(&out).contains("coprime"), "stderr: {}", stderr_of(&out));
}

#[test]
fn unknown_system_is_rejected_with_exit_2() {
    let out = bin()
        .args(["verify", "--system", "hydrogen"])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 2);
    assert!(
        stderr_of(&out).contains("unknown system"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn overtight_tolerance_reports_failures_with_exit_1() {
    let out = bin()
        .args(["numeric", "-p", "1", "-q", "1", "--tol", "1e-18"])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 1, "stderr: {}", stderr_of(&out));
    let report: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["all_pass"], false);
}

#[test]
fn numeric_suite_passes_at_default_tolerance() {
    let out = bin()
        .args(["numeric", "-p", "1", "-q", "2", "--points", "16"])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let report: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["all_pass"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 30);
}

#[test]
fn stackel_transfer_verifies_and_names_the_map() {
    let out = bin().args(["stackel", "-p", "1", "-q", "1"]).output().unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let report: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["stackel"]["map"], "H -> 4Z, om^2 -> 4Hp");
    assert_eq!(report["stackel"]["energy_identity_verified"], true);
}

#[test]
fn config_file_errors_carry_file_and_line() {
    let cfg = tmp("bad.cfg");
    std::fs::write(&cfg, "tol = 1e-10\npoints = 24\nwat = 3\n").unwrap();
    let out = bin()
        .args(["verify", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 2);
    let err = stderr_of(&out);
    assert!(err.contains("bad.cfg:3"), "stderr: {err}");
    assert!(err.contains("unknown key `wat`"), "stderr: {err}");
}

#[test]
fn flags_override_config_file() {
    let cfg = tmp("override.cfg");
    std::fs::write(
        &cfg,
        "systems = sphere\npairs = 1:1\ntol = 1e-8\nrep_draws = 0\n",
    )
    .unwrap();
    let report_path = tmp("override-report.json");
    let out = bin()
        .args(["verify", "--config", cfg.to_str().unwrap()])
        .args(["--tol", "1e-10", "--out", report_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    // The flag wins over the file's looser tolerance.
    assert_eq!(report["numerics"][0]["cfg"]["tol"], 1e-10);
    assert_eq!(report["jobs"].as_array().unwrap().len(), 1);
}

#[test]
fn env_var_names_the_default_output_directory() {
    let dir = tmp("outdir");
    std::fs::create_dir_all(&dir).unwrap();
    let out = bin()
        .args(["numeric", "-p", "1", "-q", "1"])
        .env("SUPERINT_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).is_empty(), "report goes to the file, not stdout");
    let written = dir.join("superint-numeric.json");
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&written).unwrap()).unwrap();
    assert_eq!(report["all_pass"], true);
}

#[test]
fn diff_identical_reports_exits_zero_and_prints_nothing() {
    let path = tmp("diff-same.json");
    let out = bin()
        .args(["verify", "--system", "sphere", "--skip-numerics"])
        .args(["--out", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let out = bin()
        .args(["diff", path.to_str().unwrap(), path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0);
    assert!(stdout_of(&out).is_empty());
}

#[test]
fn diff_after_tolerance_change_stays_inside_numeric_sections() {
    let (a, b) = (tmp("diff-tol-a.json"), tmp("diff-tol-b.json"));
    for (path, tol) in [(&a, "1e-10"), (&b, "1e-9")] {
        let out = bin()
            .args(["verify", "--system", "sphere", "-p", "1", "-q", "1"])
            .args(["--tol", tol, "--out", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    }
    let out = bin()
        .args(["diff", a.to_str().unwrap(), b.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 1);
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(!lines.is_empty());
    for line in &lines {
        assert!(
            line.contains(" numerics["),
            "diff escaped the numeric sections: {line}"
        );
    }
}

#[test]
fn diff_schema_mismatch_exits_two() {
    let base = tmp("diff-schema-a.json");
    let edited = tmp("diff-schema-b.json");
    let out = bin()
        .args(["verify", "--system", "sphere", "--skip-numerics"])
        .args(["--out", base.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let mut report: Value =
        serde_json::from_str(&std::fs::read_to_string(&base).unwrap()).unwrap();
    report["schema_version"] = Value::String("99".to_string());
    std::fs::write(&edited, serde_json::to_string_pretty(&report).unwrap()).unwrap();
    let out = bin()
        .args(["diff", base.to_str().unwrap(), edited.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 2);
    assert!(
        stderr_of(&out).contains("schema version mismatch"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn diff_names_changed_equation_when_report_content_differs() {
    let (a, b) = (tmp("diff-eq-a.json"), tmp("diff-eq-b.json"));
    let out = bin()
        .args(["verify", "--system", "sphere", "--skip-numerics"])
        .args(["--out", a.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    // Simulate a regression that flips one closure coefficient in the report.
    let mut report: Value = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    let poly = report["jobs"][0]["structure"]["P_polys"][0]["poly"]
        .as_str()
        .unwrap()
        .to_string();
    report["jobs"][0]["structure"]["P_polys"][0]["poly"] =
        Value::String(format!("2*({poly})"));
    std::fs::write(&b, serde_json::to_string_pretty(&report).unwrap()).unwrap();
    let out = bin()
        .args(["diff", a.to_str().unwrap(), b.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 1);
    let text = stdout_of(&out);
    assert!(
        text.contains("structure.P_polys[0].poly"),
        "diff must name the changed coefficient entry: {text}"
    );
}
