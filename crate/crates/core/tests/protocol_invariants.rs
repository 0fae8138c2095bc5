use std::f64::consts::{FRAC_PI_2, TAU};

use hybridtp::fock::DensityOperator;
use hybridtp::protocol::{
    fidelity_first_order_closed, phase_input_on_c, rho_c_first_order_printed, rho_cd_second_order,
    run_cqt_cv_first_order,
};
use hybridtp::wigner::{wigner_cat, wigner_coherent, wigner_from_fock, Convention, GridSpec};
use hybridtp::{Mode, Parity, DEFAULT_CUTOFF};
use num_complex::Complex64;

/// Frozen regression constant for `|F_numeric − F_closed| ≤ C α²`.
const FIRST_ORDER_C: f64 = 1e-10;

fn axis(n: usize) -> Vec<f64> {
    (0..n).map(|i| TAU * i as f64 / n as f64).collect()
}

#[test]
fn first_order_numeric_within_frozen_bound() {
    let alpha = 0.05;
    let mut worst = 0.0f64;
    for &phi in &axis(5) {
        for &tb in &axis(5) {
            for &tc in &axis(5) {
                let r = run_cqt_cv_first_order(phi, tb, tc, 0.3, alpha, DEFAULT_CUTOFF).unwrap();
                worst = worst.max((r.fidelity - fidelity_first_order_closed(phi, tb, tc)).abs());
            }
        }
    }
    assert!(worst <= FIRST_ORDER_C * alpha * alpha, "worst {worst:e}");
}

fn input_density(phi: f64) -> DensityOperator<f64> {
    DensityOperator::from_pure(&phase_input_on_c(phi))
}

#[test]
fn pipeline_rho_c_reproduces_input_in_ideal_regime() {
    for &phi in &axis(16) {
        let t = phi - FRAC_PI_2;
        let r = run_cqt_cv_first_order(phi, t, t, 0.0, 0.05, DEFAULT_CUTOFF).unwrap();
        let d = r.rho_c.normalized().unwrap().trace_distance(&input_density(phi)).unwrap();
        assert!(d <= 1e-10, "phi {phi}: trace distance {d:e}");
    }
}

/// The closed-form first-order density matrix as written should equal the
/// input state in the ideal regime. Its off-diagonal entry is
/// `x*(1 − y)/2 = (3/8) e^{−iφ}` there, not `½ e^{−iφ}`, so this fails.
#[test]
fn printed_rho_c_reproduces_input_in_ideal_regime() {
    let mut worst = 0.0f64;
    for &phi in &axis(16) {
        let printed = DensityOperator::from_parts(vec![Mode::C], vec![2], rho_c_first_order_printed(phi, phi - FRAC_PI_2)).unwrap();
        worst = worst.max(printed.trace_distance(&input_density(phi)).unwrap());
    }
    assert!(worst <= 1e-10, "printed density matrix is {worst:.6} away from the input state");
}

#[test]
fn fig5_diagonal_is_one_half() {
    for &phi in &axis(16) {
        let m = rho_c_first_order_printed(phi, phi - FRAC_PI_2);
        assert!((m[[0, 0]].re - 0.5).abs() < 1e-12 && (m[[1, 1]].re - 0.5).abs() < 1e-12);
    }
}

#[test]
fn second_order_density_is_hermitian() {
    for &phi in &axis(6) {
        for &tb in &axis(6) {
            let rho = rho_cd_second_order(phi, tb, 0.4, -1.3, 0.3).normalized().unwrap();
            assert!(rho.hermiticity_error() < 1e-14);
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
        }
    }
}

/// Positivity of the assembled two-click density matrix. With
/// `K = 1 + α²(1 + cos Δ)` the matrix has determinant `α⁴ sin²Δ (1 − K²) < 0`
/// whenever `sin Δ ≠ 0`, so it has a negative eigenvalue and this fails.
#[test]
fn second_order_density_is_positive_semidefinite() {
    let mut worst = 0.0f64;
    for &phi in &axis(6) {
        for &tb in &axis(6) {
            let rho = rho_cd_second_order(phi, tb, 0.4, -1.3, 0.3).normalized().unwrap();
            worst = worst.min(rho.min_eigenvalue());
        }
    }
    assert!(worst >= -1e-9, "most negative eigenvalue {worst:.6}");
}

#[test]
fn cat_wigner_functions_are_parity_symmetric() {
    for parity in [Parity::Even, Parity::Odd] {
        for (q, p) in [(0.3f64, 0.7f64), (-1.2, 0.4), (2.0, -1.5)] {
            let w = |q: f64, p: f64| wigner_cat(q, p, 0.8, parity, Convention::Symmetric);
            assert!((w(q, p) - w(-q, p)).abs() < 1e-14);
            assert!((w(q, p) - w(q, -p)).abs() < 1e-14);
        }
    }
}

#[test]
fn gaussian_states_have_non_negative_wigner_functions() {
    let spec = GridSpec { q_min: -4.0, q_max: 4.0, p_min: -4.0, p_max: 4.0, points: 61 };
    for a in [Complex64::new(0.0, 0.0), Complex64::new(0.7, -0.4), Complex64::new(-1.0, 0.2)] {
        let g = wigner_from_fock(&hybridtp::fock::make_coherent(a, DEFAULT_CUTOFF).unwrap(), spec).unwrap();
        assert!(g.min() >= -1e-12, "{a}: {}", g.min());
        for printed in [Convention::Printed, Convention::Symmetric] {
            assert!(wigner_coherent(0.1, -0.2, a, printed) >= 0.0);
        }
    }
}
