//! Full acceptance suite at full sample sizes. Prints one line per
//! criterion; criterion 15 drives the binary itself.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use percolab_core::verify::{run_criterion, CriterionResult, VerifyOptions, CRITERIA};

/// Criteria that fail by construction; see the README. They still run and
/// print FAIL, and the failure must be the analysed one.
const KNOWN_FAILING: [u32; 1] = [9];

const DETERMINISM_SPEC: &str = r#"
master_seed = 424242
lattice = { kind = "triangular_site", d = 2 }
p = 0.5
sizes = [8]
samples = 100

[verify]
sample_scale = 0.02
"#;

fn verify_run(spec: &Path, out: &Path, workers: &str) -> (Option<i32>, Vec<(String, Vec<u8>)>) {
    let o = Command::new(env!("CARGO_BIN_EXE_percolab"))
        .args(["verify", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", workers])
        .output()
        .expect("binary runs");
    let mut files: Vec<PathBuf> = fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let contents = files
        .iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(p).unwrap()))
        .collect();
    (o.status.code(), contents)
}

fn determinism_via_binary() -> CriterionResult {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("spec.toml");
    fs::write(&spec, DETERMINISM_SPEC).unwrap();
    let (code1, a) = verify_run(&spec, &tmp.path().join("w1"), "1");
    let (code8, b) = verify_run(&spec, &tmp.path().join("w8"), "8");
    let identical = !a.is_empty() && a == b && code1 == code8 && matches!(code1, Some(0 | 1));
    CriterionResult {
        id: 15,
        name: CRITERIA[14].1.to_string(),
        passed: identical,
        summary: format!(
            "verify with --workers 1 and 8: {} files each, byte-identical: {}, exit codes {:?}/{:?}",
            a.len(),
            a == b,
            code1,
            code8
        ),
        details: serde_json::Value::Null,
    }
}

#[test]
fn acceptance_criteria() {
    let opts = VerifyOptions::default();
    let mut results = Vec::new();
    for &(id, _) in CRITERIA.iter() {
        let t = Instant::now();
        let r = if id == 15 { determinism_via_binary() } else { run_criterion(id, &opts).expect("criterion runs") };
        // direct write: shown even when the harness captures test output
        let _ = writeln!(
            std::io::stderr(),
            "[{}] criterion {:>2} {} ({:.1} s): {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            t.elapsed().as_secs_f64(),
            r.summary
        );
        results.push(r);
    }

    let unexpected: Vec<u32> =
        results.iter().filter(|r| !r.passed && !KNOWN_FAILING.contains(&r.id)).map(|r| r.id).collect();
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");

    // The lower-tail check fails only through the literal sum condition of
    // the gluing step; the direct lower-tail comparison must hold.
    let r9 = &results[8];
    if !r9.passed {
        let g = &r9.details["gluing"];
        assert_eq!(g["violated"], g["sum_failures"], "gluing failed for a reason other than the sum condition");
        assert!(g["accepted"].as_u64().unwrap() > 0, "no conditioned samples were drawn");
        for t in r9.details["lower_tail"].as_array().unwrap() {
            assert_eq!(t["consistent"], true, "lower tail estimate below the implied bound: {t}");
        }
    }
}
