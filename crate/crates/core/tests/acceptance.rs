//! The acceptance battery, one test per criterion.
//!
//! Each test prints its verdict line (visible under `--nocapture`, and in
//! the failure report otherwise) and asserts it.  `verify-estimates` runs
//! the same battery from the command line.

use statwave::acceptance::{run_one, CriterionOutcome};

fn check(index: usize) {
    let CriterionOutcome {
        name,
        passed,
        detail,
        ..
    } = run_one(index);
    let verdict = if passed { "PASS" } else { "FAIL" };
    println!("criterion {index:2} {name:<22} {verdict} | {detail}");
    assert!(passed, "criterion {index} ({name}): {detail}");
}

#[test]
fn c01_herglotz_decay() {
    check(1);
}

#[test]
fn c02_herglotz_residual() {
    check(2);
}

#[test]
fn c03_resolvent_identity() {
    check(3);
}

#[test]
fn c04_resolvent_decay() {
    check(4);
}

#[test]
fn c05_multiplication_bound() {
    check(5);
}

#[test]
fn c06_neumann_convergence() {
    check(6);
}

#[test]
fn c07_correction_decay() {
    check(7);
}

#[test]
fn c08_density_asymptotics() {
    check(8);
}

#[test]
fn c09_split_identity() {
    check(9);
}

#[test]
fn c10_mode_recovery() {
    check(10);
}

#[test]
fn c11_reconstruction() {
    check(11);
}

#[test]
fn c12_propagator() {
    check(12);
}

#[test]
fn c13_duhamel_probe() {
    check(13);
}

#[test]
fn c14_discrete_ibp() {
    check(14);
}
