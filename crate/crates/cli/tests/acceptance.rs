//! Acceptance suite: every verification criterion as its own test, so the
//! test runner prints one pass/fail line per criterion. Measured values are
//! printed for inspection (visible with --nocapture and on failure).

use qdfs_cli::verify::run_criterion;

fn check(id: usize) {
    let report =
        run_criterion(id).unwrap_or_else(|| panic!("criterion {id} missing from the suite"));
    println!(
        "criterion-{:02} {}: {} ({:.0} ms)\nmeasured: {}",
        report.id,
        report.name,
        if report.passed { "PASS" } else { "FAIL" },
        report.wall_ms,
        serde_json::to_string_pretty(&report.measured).unwrap(),
    );
    assert!(
        report.passed,
        "criterion {} ({}) failed; measured: {}",
        report.id, report.name, report.measured
    );
}

#[test]
fn criterion_01_dfs_dimension() {
    check(1);
}

#[test]
fn criterion_02_pair_spectra() {
    check(2);
}

#[test]
fn criterion_03_closed_form_search() {
    check(3);
}

#[test]
fn criterion_04_saturation_vs_total_time() {
    check(4);
}

#[test]
fn criterion_05_gap_schedule() {
    check(5);
}

#[test]
fn criterion_06_repetition_effect() {
    check(6);
}

#[test]
fn criterion_07_schedule_optimization() {
    check(7);
}

#[test]
fn criterion_08_gradient_correctness() {
    check(8);
}

#[test]
fn criterion_09_self_protection() {
    check(9);
}

#[test]
fn criterion_10_logical_full_equivalence() {
    check(10);
}

#[test]
fn criterion_11_cnot_construction() {
    check(11);
}

#[test]
fn criterion_12_sign_flip_correspondence() {
    check(12);
}
