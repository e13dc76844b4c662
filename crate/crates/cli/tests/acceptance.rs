//! End-to-end CLI acceptance: byte-identical certificate streams for a
//! fixed seed (the determinism criterion), the exit-code contract, and a
//! round-trip through the fixed model JSON schema.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_qpoincare")
}

fn run_args(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let out = Command::new(bin())
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn criterion_14_preset_streams_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("run1.jsonl");
    let out2 = dir.path().join("run2.jsonl");
    let (code1, _, _) = run_args(
        &["preset", "paper-examples", "--out", out1.to_str().unwrap()],
        dir.path(),
    );
    let (code2, _, _) = run_args(
        &["preset", "paper-examples", "--out", out2.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code1, 0);
    assert_eq!(code2, 0);
    let b1 = fs::read(&out1).unwrap();
    let b2 = fs::read(&out2).unwrap();
    assert!(!b1.is_empty());
    assert_eq!(b1, b2, "same seed must reproduce the stream byte for byte");
    println!(
        "criterion 14 determinism (paper-examples stream): PASS ({} bytes)",
        b1.len()
    );
}

#[test]
fn exit_zero_on_empty_check_list() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"schema":1,"seed":7,"model":{"kind":"depolarizing","d":2},"checks":[]}"#,
    )
    .unwrap();
    let out = dir.path().join("out.jsonl");
    let (code, _, _) = run_args(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    assert_eq!(
        fs::read_to_string(&out).unwrap(),
        "",
        "empty stream for empty checks"
    );
}

#[test]
fn exit_zero_on_passing_suite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"schema":1,"seed":11,"model":{"kind":"birth_death","n":4,"beta":1.0},
           "checks":[{"name":"pi","mode":"haagerup_sa","p_grid":[2,3,4,6],"samples":10},
                     {"name":"detailed_balance","which":"gns","threshold":1e-10},
                     {"name":"eta_independence","p":4.0,"samples":5}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out.jsonl");
    let (code, _, stderr) = run_args(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code, 0, "stderr: {stderr}");
    let body = fs::read_to_string(&out).unwrap();
    assert_eq!(body.lines().count(), 42);
    assert!(body.lines().all(|l| l.contains("\"pass\":true")));
}

#[test]
fn exit_two_when_kms_only_model_fails_gns_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"schema":1,"seed":3,"model":{"kind":"kms_only","dim":3,"seed":1},
           "checks":[{"name":"detailed_balance","which":"kms","threshold":1e-10},
                     {"name":"detailed_balance","which":"gns","threshold":1e-10}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out.jsonl");
    let (code, _, stderr) = run_args(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(
        stderr.contains("detailed_balance_gns"),
        "failing certificate is named: {stderr}"
    );
    let body = fs::read_to_string(&out).unwrap();
    assert!(body.contains("\"name\":\"detailed_balance_kms\"") && body.contains("\"pass\":true"));
    assert!(body.contains("\"name\":\"detailed_balance_gns\""));
    assert!(body
        .lines()
        .any(|l| l.contains("gns") && l.contains("\"pass\":false")));
}

#[test]
fn exit_one_on_operational_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.jsonl");
    // missing config file
    let (code, _, _) = run_args(
        &[
            "run",
            "--config",
            "nope.json",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code, 1);
    // unknown check name rejected at parse time
    let cfg = dir.path().join("bad.json");
    fs::write(
        &cfg,
        r#"{"schema":1,"seed":1,"model":{"kind":"depolarizing","d":2},
           "checks":[{"name":"frobnicate"}]}"#,
    )
    .unwrap();
    let (code, _, stderr) = run_args(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code, 1, "unknown checks must be rejected: {stderr}");
    // missing seed
    fs::write(
        &cfg,
        r#"{"schema":1,"model":{"kind":"depolarizing","d":2},"checks":[]}"#,
    )
    .unwrap();
    let (code, _, _) = run_args(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code, 1, "seed is mandatory");
    // wrong schema version
    fs::write(
        &cfg,
        r#"{"schema":2,"seed":1,"model":{"kind":"depolarizing","d":2},"checks":[]}"#,
    )
    .unwrap();
    let (code, _, _) = run_args(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code, 1);
    // unknown preset
    let (code, _, _) = run_args(&["preset", "no-such-preset"], dir.path());
    assert_eq!(code, 1);
}

#[test]
fn config_output_path_is_used_when_no_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"schema":1,"seed":9,"output":{"format":"json","path":"from-config.jsonl"},
           "model":{"kind":"depolarizing","d":2},
           "checks":[{"name":"gap_exact","expected":1.0}]}"#,
    )
    .unwrap();
    let (code, _, stderr) = run_args(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(dir.path().join("from-config.jsonl").exists());
}

#[test]
fn report_counts_malformed_and_emits_fixed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"schema":1,"seed":5,"model":{"kind":"depolarizing","d":2},
           "checks":[{"name":"pi","mode":"tracial_sa","p_grid":[2,4],"samples":5}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out.jsonl");
    let (code, _, _) = run_args(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    // append a malformed line
    let mut body = fs::read_to_string(&out).unwrap();
    body.push_str("this is not json\n");
    fs::write(&out, body).unwrap();
    let (code, stdout, stderr) = run_args(&["report", out.to_str().unwrap(), "--csv"], dir.path());
    assert_eq!(code, 0);
    assert!(
        stderr.contains("1 of 11 lines malformed"),
        "stderr: {stderr}"
    );
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next().unwrap(),
        "model,check,p,q,samples,max_ratio,min_margin,pass"
    );
    // two grouped rows (p = 2 and p = 4), lexicographically sorted
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("depolarizing(d=2),pi_tracial_sa,2,2,5,"));
    assert!(rows[1].starts_with("depolarizing(d=2),pi_tracial_sa,4,4,5,"));
}

#[test]
fn model_json_schema_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"schema":1,"seed":2,"model":{"kind":"birth_death","n":2,"beta":1.0},
           "checks":[{"name":"gap_exact","expected":2.2552519304127614}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out.jsonl");
    let dumped = dir.path().join("model.json");
    let (code, _, stderr) = run_args(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--dump-model",
            dumped.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code, 0, "stderr: {stderr}");

    // rebuild a custom-model config from the dumped generator JSON
    let dumped_json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&dumped).unwrap()).unwrap();
    assert_eq!(dumped_json["kind"], "birth_death");
    assert_eq!(dumped_json["tags"][0], "gns_db");
    let custom = serde_json::json!({
        "schema": 1,
        "seed": 2,
        "model": {
            "kind": "custom",
            "dim": dumped_json["dim"],
            "jumps": dumped_json["jumps"],
            "state": dumped_json["state"],
            "tags": dumped_json["tags"],
        },
        "checks": [{"name": "gap_exact", "expected": 2.2552519304127614}]
    });
    let cfg2 = dir.path().join("cfg2.json");
    fs::write(&cfg2, serde_json::to_string(&custom).unwrap()).unwrap();
    let out2 = dir.path().join("out2.jsonl");
    let (code, _, stderr) = run_args(
        &[
            "run",
            "--config",
            cfg2.to_str().unwrap(),
            "--out",
            out2.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code, 0, "custom model must reproduce the gap: {stderr}");
    let body = fs::read_to_string(&out2).unwrap();
    assert!(body.contains("\"name\":\"gap_exact\"") && body.contains("\"pass\":true"));
}
