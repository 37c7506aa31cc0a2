//! Acceptance gate: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines
//! on success as well.

use jacobi_tensor::checks::{
    check_baseline, check_descent, check_example_7_1, check_gamma_decompositions,
    check_gradients, check_pair_selection, check_proximal, check_quadform_fidelity,
    check_stationarity, check_structure, check_synthetic_recovery, CheckReport,
};

fn gate(criterion: &str, rep: &CheckReport) {
    println!("criterion {criterion}: {}", rep.summary_line());
    for f in rep.failures.iter().take(10) {
        println!("    {f}");
    }
    assert!(rep.passed(), "criterion {criterion} failed: {}", rep.summary_line());
}

#[test]
fn criterion_1_example_7_1_reproduction() {
    gate("1 (benchmark tensor)", &check_example_7_1());
    gate("1 (baseline plateau)", &check_baseline());
}

#[test]
fn criterion_2_quadform_fidelity() {
    let start = std::time::Instant::now();
    gate("2 (builder fidelity)", &check_quadform_fidelity(20260810, 100));
    gate("2 (γ = 1,2,3 decompositions)", &check_gamma_decompositions(20260811));
    let elapsed = start.elapsed().as_secs_f64();
    println!("criterion 2 runtime: {elapsed:.1}s");
    assert!(elapsed < 60.0, "criterion 2 exceeded 60 s ({elapsed:.1}s)");
}

#[test]
fn criterion_3_gradient_correctness() {
    gate("3 (gradients + submatrix identities)", &check_gradients(20260812, 20));
}

#[test]
fn criterion_4_descent_inequality() {
    gate("4 (descent + proximal gain)", &check_descent(20260813, 20));
}

#[test]
fn criterion_5_pair_selection() {
    gate("5 (pair selection)", &check_pair_selection(20260814, 100));
}

#[test]
fn criterion_6_stationarity_equivalence() {
    gate("6 (stationarity equivalence)", &check_stationarity(20260815, 20));
}

#[test]
fn criterion_7_synthetic_recovery() {
    gate("7 (synthetic recovery)", &check_synthetic_recovery(20260816));
}

#[test]
fn criterion_8_structural_guarantees() {
    gate("8 (structure)", &check_structure(20260817, 12));
    gate("8 (proximal solves)", &check_proximal(20260818, 100));
}
