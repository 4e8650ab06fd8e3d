//! End-to-end growth-rate checks on the real transfer systems.

use tubeknots::patterns::{restricted_system, standard_system};
use tubeknots::spectral::{evaluate, growth_rate, norm_power_bound, MatrixKind};

#[test]
fn growth_rate_of_the_full_class() {
    let g = growth_rate(standard_system(), 1e-12).unwrap();
    assert!(
        (g.kappa - 0.82694822250681).abs() < 1e-9,
        "kappa = {:.14} (x0 = {:.14})",
        g.kappa,
        g.x0
    );
}

#[test]
fn growth_rate_of_the_no_2section_class() {
    let g = growth_rate(restricted_system(), 1e-12).unwrap();
    assert!(
        (g.kappa - 0.43623880228124).abs() < 1e-9,
        "kappa = {:.14} (x0 = {:.14})",
        g.kappa,
        g.x0
    );
}

#[test]
fn norm_bound_at_064_certifies_the_gap() {
    // At weight 0.64 the tenth-power norm of the restricted matrix stays
    // below 0.99485 even after the rounding budget, so the no-2-section
    // growth rate is provably below -log(0.64) = 0.446287.
    let m = evaluate(restricted_system(), MatrixKind::T, 0.64);
    let b = norm_power_bound(&m, 10).unwrap();
    assert!(
        b.certified_root < 0.99485,
        "certified root {:.6} (raw {:.6}, budget {:.2e})",
        b.certified_root,
        b.root,
        b.rounding_budget
    );
}
