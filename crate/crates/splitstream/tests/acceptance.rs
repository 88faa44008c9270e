//! Acceptance battery: one test per criterion, each printing its pass/fail
//! line with the measured values (visible with `--nocapture`).
//!
//! Run with `cargo test -p splitstream --test acceptance`.

use splitstream::validation::{self, CriterionResult, SuiteConfig};

fn run(criterion: fn(&SuiteConfig) -> CriterionResult) {
    let cfg = SuiteConfig::default();
    let result = criterion(&cfg);
    println!("{}", result.line());
    assert!(result.passed(), "{}", result.line());
}

#[test]
fn criterion_01_static_exact_value() {
    run(validation::static_exact_value);
}

#[test]
fn criterion_02_static_constants() {
    run(validation::static_constants);
}

#[test]
fn criterion_03_static_slope_routes() {
    run(validation::static_slope_routes);
}

#[test]
fn criterion_04_renewal_oracle() {
    run(validation::renewal_oracle);
}

#[test]
fn criterion_05_fluctuation_mean() {
    run(validation::fluctuation_mean);
}

#[test]
fn criterion_06_binary_closed_forms() {
    run(validation::binary_closed_forms);
}

#[test]
fn criterion_07_transform_residuals() {
    run(validation::transform_residuals);
}

#[test]
fn criterion_08_boundary_conditions() {
    run(validation::boundary_conditions);
}

#[test]
fn criterion_09_dynamic_crosscheck() {
    run(validation::dynamic_crosscheck);
}

#[test]
fn criterion_10_stability_threshold() {
    run(validation::stability_threshold);
}

#[test]
fn criterion_11_simulator_equivalence() {
    run(validation::simulator_equivalence);
}

#[test]
fn criterion_12_regularization_invariance() {
    run(validation::regularization_invariance);
}
