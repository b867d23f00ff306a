//! Independent derivative oracle: forward-mode jets against central finite
//! differences for every built-in potential on its sample grid.

use hkma_core::expr::Expr;
use hkma_core::jets::finite_difference_check;
use hkma_core::potentials::{
    calabi_h_reduced, calabi_omega_full, flat_h, flat_omega, flat_omega_prime, CoordSystem,
    Domain, Potential,
};
use hkma_core::sample::{default_calabi_grid, default_full_grid, default_reduced_grid};

const STEP: f64 = 1e-5;
const TOL: f64 = 1e-6;

#[test]
fn flat_h_agrees_with_finite_differences() {
    let h = flat_h();
    for p in default_reduced_grid(25) {
        let dev = finite_difference_check(&h, &p.to_array(), STEP).unwrap();
        assert!(dev <= TOL, "deviation {dev} at {p:?}");
    }
}

#[test]
fn constant_field_has_zero_deviation() {
    let c = Potential::new(
        "const",
        CoordSystem::Reduced,
        Domain::All,
        Expr::real(4.25),
    );
    let dev = finite_difference_check(&c, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6], STEP).unwrap();
    assert!(dev <= 1e-15);
}

#[test]
fn calabi_omega_at_spec_point() {
    // z = (1, 1), w = (0, -i)
    let dev = finite_difference_check(
        &calabi_omega_full(),
        &[1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0],
        STEP,
    )
    .unwrap();
    assert!(dev < 1e-5, "deviation {dev}");
}

#[test]
fn all_builtins_on_their_grids() {
    for p in default_reduced_grid(20) {
        for field in [flat_h(), calabi_h_reduced()] {
            let dev = finite_difference_check(&field, &p.to_array(), STEP).unwrap();
            assert!(dev <= TOL, "{}: deviation {dev}", field.name());
        }
    }
    for p in default_full_grid(20) {
        for field in [flat_omega(), flat_omega_prime()] {
            let dev = finite_difference_check(&field, &p.to_array(), STEP).unwrap();
            assert!(dev <= TOL, "{}: deviation {dev}", field.name());
        }
    }
    for p in default_calabi_grid(20) {
        let dev = finite_difference_check(&calabi_omega_full(), &p.to_array(), STEP).unwrap();
        assert!(dev <= TOL, "calabi-omega: deviation {dev}");
    }
}

#[test]
fn nonpositive_step_is_rejected() {
    let h = flat_h();
    assert!(finite_difference_check(&h, &[0.0; 6], 0.0).is_err());
    assert!(finite_difference_check(&h, &[0.0; 6], -1e-5).is_err());
}

#[test]
fn stencil_leaving_the_domain_errors() {
    // calabi-H is restricted to the safe box; a point at the rho boundary
    // pushes the stencil outside
    let h = calabi_h_reduced();
    let err = finite_difference_check(&h, &[0.0, 0.0, 0.0, 0.0, 0.0, 2.0], STEP).unwrap_err();
    assert!(err.to_string().contains("safe box"));
}
