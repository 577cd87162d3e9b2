//! Runs each acceptance criterion at its stated tolerance and time budget.

use docalc::selftest::{run_criterion, DEFAULT_SEED};

fn check(id: u8) {
    let report = run_criterion(id, DEFAULT_SEED).expect("known criterion");
    println!("{report} [{:.2?} of {:?}]", report.elapsed, report.budget);
    assert!(report.passed, "{report}");
}

#[test]
fn criterion_1_golden_derivations() {
    check(1);
}

#[test]
fn criterion_2_oracle_equality() {
    check(2);
}

#[test]
fn criterion_3_dsep_soundness() {
    check(3);
}

#[test]
fn criterion_4_rule_soundness() {
    check(4);
}

#[test]
fn criterion_5_bow_nonidentifiability() {
    check(5);
}

#[test]
fn criterion_6_augmented_network() {
    check(6);
}

#[test]
fn criterion_7_policies() {
    check(7);
}

#[test]
fn criterion_8_passive_active() {
    check(8);
}
