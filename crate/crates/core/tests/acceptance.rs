//! Runs every acceptance experiment and prints one line per criterion.

use std::io::Write;

use sgm_core::harness::{run_experiment, EXPERIMENTS};

/// Writes to the process's stdout directly, so the lines survive test output capture.
fn check(id: usize) {
    let report = run_experiment(id);
    let mut text = format!("{}\n", report.line());
    for d in &report.details {
        text.push_str(&format!("    {d}\n"));
    }
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    assert!(report.passed, "criterion {id} ({}) failed", report.slug);
}

#[test]
fn criterion_1_linear_rate() {
    check(1);
}

#[test]
fn criterion_2_optstep() {
    check(2);
}

#[test]
fn criterion_3_basic_rate() {
    check(3);
}

#[test]
fn criterion_4_averaged_rate() {
    check(4);
}

#[test]
fn criterion_5_double_step() {
    check(5);
}

#[test]
fn criterion_6_switching() {
    check(6);
}

#[test]
fn criterion_7_unbounded() {
    check(7);
}

#[test]
fn criterion_8_oracle_equivalence() {
    check(8);
}

#[test]
fn criterion_9_noslater() {
    check(9);
}

#[test]
fn experiment_table_is_complete() {
    let ids: Vec<usize> = EXPERIMENTS.iter().map(|e| e.0).collect();
    assert_eq!(ids, (1..=9).collect::<Vec<_>>());
}
