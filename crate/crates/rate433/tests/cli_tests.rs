//! End-to-end runs of the command-line driver: stdout contracts, artifact
//! determinism, and the documented exit codes (1 for a failed mathematical
//! check, 2 for an unusable request).

use rate433::entropy::ClassTable;
use rate433::proof::{verify_certificate, Certificate};
use std::path::Path;
use std::process::{Command, Output};

const REFERENCE_CERT: &str = include_str!("fixtures/reference_certificate_4_6_3.json");

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rate433"))
        .args(args)
        .output()
        .expect("driver spawns")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("driver not killed by signal")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn reduce_reports_published_counts() {
    let dir = tempfile::tempdir().unwrap();
    let sys_path = dir.path().join("system.json");
    let out = run(&["reduce", "--out", sys_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("symmetry classes: 177 (174 free)"), "{text}");
    assert!(text.contains("entropy terms: 175"), "{text}");
    assert!(text.contains("lp columns: 176"), "{text}");
    assert!(text.contains("column check: matches the published 175-term / 176-variable count"), "{text}");
    assert!(text.contains("5084 rows here vs 6152 published"), "{text}");

    let doc: serde_json::Value = serde_json::from_str(&read(&sys_path)).unwrap();
    assert_eq!(doc["counts"]["rows_out"], 5084);
    assert_eq!(doc["counts"]["elementals_in"], 1_966_096);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 5084);
}

#[test]
fn sweep_writes_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let json1 = dir.path().join("curve1.json");
    let csv1 = dir.path().join("curve1.csv");
    let args = |j: &Path, c: &Path| {
        vec![
            "sweep".to_string(),
            "--alphas".to_string(),
            "1/4,5/12,1/2".to_string(),
            "--threads".to_string(),
            "1".to_string(),
            "--out".to_string(),
            j.to_str().unwrap().to_string(),
            "--csv".to_string(),
            c.to_str().unwrap().to_string(),
        ]
    };
    let a1 = args(&json1, &csv1);
    let out = run(&a1.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("alpha=1/4 INFEASIBLE"), "{text}");
    assert!(text.contains("alpha=5/12 beta=2/9"), "{text}");
    assert!(text.contains("alpha=1/2 beta=1/6"), "{text}");
    assert!(text.contains("supporting lines:"), "{text}");
    assert!(text.contains("4 alpha + 6 beta >= 3 B"), "{text}");

    let doc: serde_json::Value = serde_json::from_str(&read(&json1)).unwrap();
    assert_eq!(doc["points"].as_array().unwrap().len(), 3);
    assert!(doc["points"][0]["beta"].is_null());
    assert_eq!(doc["points"][1]["beta"], "2/9");
    assert!(read(&csv1).contains("1/4,INFEASIBLE"));

    // A second identical run reproduces both artifacts byte for byte.
    let json2 = dir.path().join("curve2.json");
    let csv2 = dir.path().join("curve2.csv");
    let a2 = args(&json2, &csv2);
    let out = run(&a2.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&out), 0);
    assert_eq!(read(&json1), read(&json2));
    assert_eq!(read(&csv1), read(&csv2));
}

#[test]
fn prove_emits_certificate_and_proof() {
    let dir = tempfile::tempdir().unwrap();
    let cert_path = dir.path().join("cert.json");
    let proof_path = dir.path().join("proof.md");
    let out = run(&[
        "prove",
        "--facet",
        "4,6,3",
        "--out",
        cert_path.to_str().unwrap(),
        "--proof",
        proof_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("facet 4 alpha + 6 beta >= 3 B: certificate with 9 rows, total weight 16"),
        "{text}"
    );

    // The emitted certificate re-verifies in process against a fresh table.
    let cert = Certificate::from_json(&read(&cert_path)).unwrap();
    let table = ClassTable::build();
    let check = verify_certificate(&cert, &table).unwrap();
    assert_eq!(check.rows, 9);

    let proof = read(&proof_path);
    assert!(proof.contains("# Dual certificate for `4 alpha + 6 beta >= 3 B`"));
    assert!(proof.contains("Concrete rows:"));
    assert!(proof.contains("Conclusion: 4 alpha + 6 beta >= 3 B holds"));
    assert!(!proof.contains("FAILED"));
}

#[test]
fn verify_cert_accepts_the_reference_and_rejects_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, REFERENCE_CERT).unwrap();
    let out = run(&["verify-cert", good.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(
        stdout(&out).contains("certificate ok: 4 alpha + 6 beta >= 3 B proves 8 rows with total weight 16"),
        "{}",
        stdout(&out)
    );

    let corrupted = REFERENCE_CERT.replacen("\"multiplier\": \"7\"", "\"multiplier\": \"8\"", 1);
    assert_ne!(corrupted, REFERENCE_CERT);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, corrupted).unwrap();
    let out = run(&["verify-cert", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "stdout: {}", stdout(&out));
    let err = stderr(&out);
    assert!(err.contains("error: certificate-invalid"), "{err}");
    assert!(err.contains("misses the facet"), "{err}");
}

#[test]
fn prove_rejects_an_unprovable_line_with_exit_one() {
    let out = run(&["prove", "--facet", "1,1,1"]);
    assert_eq!(code(&out), 1, "stdout: {}", stdout(&out));
    let err = stderr(&out);
    assert!(err.contains("error: facet-not-provable"), "{err}");
    assert!(err.contains("facet not provable"), "{err}");
}

#[test]
fn prove_accepts_an_implied_line() {
    // alpha + 3 beta >= B is a positive combination of two region facets,
    // so extraction succeeds even though the line is nowhere uniquely tight.
    let out = run(&["prove", "--facet", "1,3,1"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("facet alpha + 3 beta >= B: certificate with"), "{text}");
}

#[test]
fn unusable_requests_exit_two() {
    // Degenerate facet: no storage or bandwidth coefficient.
    let out = run(&["prove", "--facet", "0,0,1"]);
    assert_eq!(code(&out), 2, "stdout: {}", stdout(&out));
    assert!(stderr(&out).contains("error: domain-error"), "{}", stderr(&out));

    // Malformed facet string.
    let out = run(&["prove", "--facet", "4,six,3"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("bad facet coefficient"), "{}", stderr(&out));

    // Decimals are not exact rationals.
    let out = run(&["sweep", "--alphas", "0.4"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("error: invalid-rational"), "{}", stderr(&out));

    // Unknown construction name.
    let out = run(&["verify-code", "--kind", "hexagon"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("error: domain-error"), "{}", stderr(&out));

    // check-vector needs a source, and refuses two.
    let out = run(&["check-vector"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("pass exactly one of --vector or --kind"), "{}", stderr(&out));
    let out = run(&["check-vector", "--vector", "x.json", "--kind", "msr"]);
    assert_eq!(code(&out), 2);

    // Zero threads is unusable.
    let out = run(&["sweep", "--alphas", "1/3", "--threads", "0"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("at least one thread"), "{}", stderr(&out));
}

#[test]
fn verify_code_reports_exact_work_counts() {
    let out = run(&["verify-code", "--kind", "msr"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("code msr: pass (8 messages, 32 repairs, 32 reconstructions)"), "{text}");
    assert!(text.contains("normalized point: alpha=1/3 beta=1/3 over 3 message bits"), "{text}");

    let out = run(&["verify-code", "--kind", "interior", "--samples", "50", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("code interior: pass (50 messages, 200 repairs, 200 reconstructions)"), "{text}");

    let out = run(&["verify-code", "--kind", "mbr", "--symmetrize", "--samples", "3", "--seed", "5"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("code mbr (symmetrized): pass"), "{}", stdout(&out));
}

#[test]
fn entropy_vector_round_trips_through_check_vector() {
    let dir = tempfile::tempdir().unwrap();
    let vec_path = dir.path().join("mbr.json");
    let out = run(&["entropy-vector", "--kind", "mbr", "--out", vec_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let out = run(&["check-vector", "--vector", vec_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("closure consistency: ok"), "{text}");
    assert!(text.contains("full symmetry: ok"), "{text}");
    assert!(text.contains("vector admissible"), "{text}");
}
