mod common;

use common::*;

fn assert_all(checks: Vec<Check>) {
    for c in &checks {
        println!("{:<24} p = {:.4}", c.name, c.p);
    }
    let bad: Vec<_> = checks.iter().filter(|c| c.p.is_nan() || c.p <= P_MIN).collect();
    assert!(bad.is_empty(), "failed: {bad:?}");
}

#[test]
fn gamma_scale() {
    assert_all(check_gamma(&instance()));
}

#[test]
fn mark_parameters() {
    assert_all(check_mark_params(&instance()));
}

#[test]
fn type_and_component_indicators() {
    assert_all(check_type_indicators(&instance()));
}

#[test]
fn type_probabilities() {
    assert_all(check_type_probs(&instance()));
}

#[test]
fn dp_precision() {
    assert_all(check_dp_precision(&instance()));
}

#[test]
fn stick_weights() {
    assert_all(check_sticks(&instance()));
}

#[test]
fn component_indicators() {
    assert_all(check_component_indicators(&instance()));
}

#[test]
fn component_mean() {
    assert_all(check_component_mean(&instance()));
}

#[test]
fn component_covariance() {
    assert_all(check_component_cov(&instance()));
}
