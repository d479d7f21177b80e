use jcsum::lambert::{
    branch_point_residual, branch_point_w0, critical_detuning, generalized_coefficients, generalized_lambert,
    generalized_series, lagrange_coefficient, lambert_series, lambert_w, lambert_w_k, BranchIndex,
    GeneralizedLambertQuery,
};
use num_complex::Complex64 as C;
use proptest::prelude::*;
use std::f64::consts::{E, PI};

fn polar() -> impl Strategy<Value = C> {
    // Log-uniform radius, angle kept off the negative real axis.
    (-3.0f64..3.0, -3.1f64..3.1).prop_map(|(lr, a)| C::from_polar(10f64.powf(lr), a))
}

/// `k` from `W + ln W = ln u + 2πik` with principal logarithms.
fn branch_of(w: C, u: C) -> i32 {
    (((w + w.ln()).im - u.arg()) / (2.0 * PI)).round() as i32
}

#[test]
fn branch_point_and_origin() {
    let m = C::new(-1.0 / E, 0.0);
    assert!((lambert_w_k(0, m).unwrap() + 1.0).norm() < 1e-6);
    assert!((lambert_w_k(-1, m).unwrap() + 1.0).norm() < 1e-6);
    assert_eq!(lambert_w_k(0, C::new(0.0, 0.0)).unwrap(), C::new(0.0, 0.0));
    assert!(lambert_w_k(1, C::new(0.0, 0.0)).is_err());
}

#[test]
fn real_principal_values() {
    // Omega constant and W(e) = 1.
    assert!((lambert_w_k(0, C::new(1.0, 0.0)).unwrap() - 0.567_143_290_409_783_8).norm() < 1e-15);
    assert!((lambert_w_k(0, C::new(E, 0.0)).unwrap() - 1.0).norm() < 1e-15);
    let w = lambert_w_k(-1, C::new(-0.1, 0.0)).unwrap();
    assert!((w.re + 3.577_152_063_957_297).abs() < 1e-13 && w.im.abs() < 1e-15);
}

#[test]
fn lagrange_coefficients_are_exact_for_low_orders() {
    let expect = [1.0, -1.0, 1.5, -8.0 / 3.0, 125.0 / 24.0, -54.0 / 5.0];
    for (n, e) in expect.iter().enumerate() {
        let c = lagrange_coefficient(n as u32 + 1);
        assert!((c - e).abs() < 1e-14 * e.abs(), "n = {}", n + 1);
    }
}

#[test]
fn forty_term_series_error_grows_toward_the_radius() {
    // Truncation error of the 40-term series along the positive axis.
    let err = |r: f64| (lambert_series(C::new(r, 0.0), 40).unwrap() - lambert_w_k(0, C::new(r, 0.0)).unwrap()).norm();
    assert!(err(0.2) < 1e-13);
    assert!(err(0.25) < 1e-9);
    assert!(err(0.3) > 1e-7);
}

#[test]
fn generalized_reduces_to_lambert_at_resonance() {
    for k in -3..=3 {
        for u in [C::new(0.3, 0.4), C::new(-2.0, 0.1), C::new(5.0, -7.0)] {
            let q = GeneralizedLambertQuery { u, nu: 0.0, branch: BranchIndex::new(k) };
            let g = generalized_lambert(&q, None).unwrap();
            assert!((g.w - lambert_w_k(k, u).unwrap()).norm() < 1e-14);
            // The principal root of e^{2w} may be −e^w; the sign records it.
            let v = g.sqrt_sign * g.w * (2.0 * g.w).exp().sqrt();
            assert!((v - u).norm() < 1e-13 * u.norm().max(1.0));
        }
    }
}

#[test]
fn generalized_series_at_small_tau_matches_the_solver() {
    for nu in [0.0, 0.05, 0.2] {
        let tau = 0.04;
        let s = generalized_series(tau, nu, 30).unwrap();
        let u = C::new(0.0, 0.5 * tau.sqrt());
        let q = GeneralizedLambertQuery { u, nu, branch: BranchIndex::PRINCIPAL };
        let g = generalized_lambert(&q, Some(s)).unwrap();
        assert!((g.w - s).norm() < 1e-12, "nu = {nu}");
    }
    let c = generalized_coefficients(0.0, 3);
    assert!((c[0] - 1.0).abs() < 1e-15 && (c[1] + 1.0).abs() < 1e-15 && (c[2] - 1.5).abs() < 1e-15);
}

#[test]
fn branch_point_curve() {
    assert_eq!(branch_point_w0(0.0, 60).unwrap().w0, C::new(-1.0, 0.0));
    let nu0 = critical_detuning();
    assert!((nu0 - 0.024_893_534_183_931_97).abs() < 1e-17);
    let mut last = -1.0;
    for nu in [0.001, 0.005, 0.01, 0.02, 0.024] {
        let b = branch_point_w0(nu, 80).unwrap();
        assert!(branch_point_residual(nu, b.w0) < 1e-12);
        assert!(b.w0.re < last && b.w0.im == 0.0 && !b.supercritical);
        last = b.w0.re;
    }
    let b = branch_point_w0(0.05, 80).unwrap();
    assert!(b.supercritical && b.w0.im.abs() > 0.0 && b.residual < 1e-12);
    // At ν₀ the branch point is w = −3/2.
    let b = branch_point_w0(nu0 * (1.0 - 1e-12), 400).unwrap();
    assert!((b.w0.re + 1.5).abs() < 1e-4);
}

proptest! {
    #[test]
    fn residual_is_small_on_every_branch(u in polar(), k in -5i32..=5) {
        let w = lambert_w_k(k, u).unwrap();
        prop_assert!((w * w.exp() - u).norm() <= 1e-12 * u.norm().max(1.0));
    }

    #[test]
    fn solutions_lie_on_the_requested_branch(u in polar(), k in -5i32..=5) {
        prop_assume!((u + 1.0 / E).norm() > 1e-3);
        let w = lambert_w_k(k, u).unwrap();
        prop_assert_eq!(branch_of(w, u), k);
    }

    #[test]
    fn conjugation_symmetry(u in polar(), k in -5i32..=5) {
        let a = lambert_w_k(k, u).unwrap();
        let b = lambert_w_k(-k, u.conj()).unwrap();
        prop_assert!((a.conj() - b).norm() <= 1e-13 * a.norm().max(1.0));
        let c = lambert_w(BranchIndex::new(k).mirrored(), u.conj()).unwrap();
        prop_assert!((c - a.conj()).norm() <= 1e-13 * a.norm().max(1.0));
    }

    #[test]
    fn series_agrees_inside_the_radius(r in 0.0f64..0.3, a in -PI..PI) {
        let u = C::from_polar(r, a);
        // Enough terms for (e|u|)^n/n^{3/2} < 1e-16.
        let n = if r < 1e-3 { 10 } else { ((-37.0) / (E * r).ln()).ceil().clamp(10.0, 400.0) as u32 };
        let s = lambert_series(u, n).unwrap();
        prop_assert!((s - lambert_w_k(0, u).unwrap()).norm() < 1e-12, "n = {}", n);
    }

    #[test]
    fn generalized_residual_is_small(lr in -0.5f64..1.5, a in -3.1f64..3.1, k in -3i32..=3, nu in 0.0f64..0.3) {
        let u = C::from_polar(10f64.powf(lr), a);
        let g = generalized_lambert(&GeneralizedLambertQuery { u, nu, branch: BranchIndex::new(k) }, None).unwrap();
        prop_assert!(g.residual <= 1e-12 * u.norm().max(1.0));
        let v = g.sqrt_sign * g.w * (nu + (2.0 * g.w).exp()).sqrt();
        prop_assert!((v - u).norm() <= 1e-12 * u.norm().max(1.0));
    }

    #[test]
    fn generalized_solution_is_continuous_in_nu(lr in -0.5f64..1.5, a in -3.1f64..3.1, k in -2i32..=2, nu in 0.01f64..0.3) {
        let u = C::from_polar(10f64.powf(lr), a);
        let q = |nu| GeneralizedLambertQuery { u, nu, branch: BranchIndex::new(k) };
        let w1 = generalized_lambert(&q(nu), None).unwrap().w;
        let w2 = generalized_lambert(&q(nu * (1.0 + 1e-6)), None).unwrap().w;
        prop_assert!((w1 - w2).norm() < 1e-3);
    }
}
