//! End-to-end acceptance checks, one test per criterion.
//!
//! Each test runs one check from `josephson_kit::acceptance`, prints its
//! single `[PASS]`/`[FAIL]` line, and asserts the verdict. The full numeric
//! detail (measured values, budgets) is part of that line, so a failure
//! message is self-contained.

use josephson_kit::acceptance::{self, CheckResult};

fn report(result: CheckResult) {
    let line = result.line();
    println!("{line}");
    assert!(result.pass, "{line}");
}

#[test]
fn limits_table_reproduces_the_reference_rows() {
    report(acceptance::check_reference_limits());
}

#[test]
fn condensate_source_limits_at_ten_thousand_particles() {
    report(acceptance::check_condensate_row());
}

#[test]
fn measured_frequencies_match_the_tilted_splitting() {
    report(acceptance::check_oscillation_frequencies());
}

#[test]
fn thermal_equilibrium_is_a_fixed_point() {
    report(acceptance::check_equilibrium_fixed_point());
}

#[test]
fn kicked_imbalance_follows_the_first_order_form() {
    report(acceptance::check_kicked_first_order());
}

#[test]
fn conservation_and_engine_agreement_on_random_states() {
    report(acceptance::check_conservation_and_engine_agreement(42));
}

#[test]
fn many_body_evolution_matches_the_reduced_dynamics() {
    report(acceptance::check_many_body_oracle());
}

#[test]
fn first_order_displays_converge_quadratically_in_the_tilt() {
    report(acceptance::check_first_order_convergence());
}

#[test]
fn grid_eigensolver_converges_quadratically_and_splits_sides() {
    report(acceptance::check_eigensolver_convergence());
}

#[test]
fn equation_of_state_isolines_close_on_themselves() {
    report(acceptance::check_equation_of_state_isolines());
}
