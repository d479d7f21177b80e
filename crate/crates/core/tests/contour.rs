use jcsum::exact::{inversion_exact_resonant, ModelParams, PhotonDistribution, DEFAULT_TAIL_TOLERANCE};
use jcsum::hankel::{
    build_default_path, build_path, cos_via_hankel, inversion_contour, inversion_contour_detuned,
    inversion_contour_resonant, PathOptions,
};
use proptest::prelude::*;

/// `−Σ W_n cos(2√(μ+n) t)`, the closed form of the detuned loop integral.
fn unit_weight_sum(alpha: f64, mu: f64, t: f64) -> f64 {
    let d = PhotonDistribution::poisson(alpha, DEFAULT_TAIL_TOLERANCE).unwrap();
    -d.weights().iter().enumerate().map(|(n, w)| w * (2.0 * (mu + n as f64).sqrt() * t).cos()).sum::<f64>()
}

#[test]
fn matches_the_exact_sum_on_a_wide_grid() {
    for alpha in [1.0, 3.0, 7.0] {
        let d = PhotonDistribution::poisson(alpha, DEFAULT_TAIL_TOLERANCE).unwrap();
        for k in 1..=40 {
            let t = 0.37 * k as f64 * alpha / 3.0;
            let path = build_default_path(alpha, (t / alpha).powi(2)).unwrap();
            let c = inversion_contour_resonant(alpha, t, &path).unwrap();
            let e = inversion_exact_resonant(&d, t).unwrap();
            assert!((c.value - e).abs() < 1e-11, "alpha = {alpha}, t = {t}: {} vs {e}", c.value);
            assert!(c.imag_residual.abs() < 1e-12);
        }
    }
}

#[test]
fn result_does_not_depend_on_the_path() {
    let params = ModelParams::resonant(5.0).unwrap();
    for t in [0.2, 3.0, 17.0, 33.0] {
        let base = inversion_contour(&params, t, &PathOptions::default()).unwrap().value;
        let variants = [
            PathOptions { ray_angle: 0.5, ..PathOptions::default() },
            PathOptions { ray_angle: 1.2, ..PathOptions::default() },
            PathOptions { inner_radius_cap: 0.1, ..PathOptions::default() },
            PathOptions { density: 0.6, ..PathOptions::default() },
        ];
        for o in variants {
            let v = inversion_contour(&params, t, &o).unwrap().value;
            assert!((v - base).abs() < 1e-12, "t = {t}, {o:?}: {v} vs {base}");
        }
    }
}

#[test]
fn refinement_is_converged() {
    let alpha = 5.0;
    for t in [1.0, 25.0, 44.0] {
        let path = build_default_path(alpha, (t / alpha).powi(2)).unwrap();
        let a = inversion_contour_resonant(alpha, t, &path).unwrap();
        let b = inversion_contour_resonant(alpha, t, &path.refined()).unwrap();
        assert_eq!(path.refined().panel_count(), 2 * path.panel_count());
        assert!((a.value - b.value).abs() < 1e-12);
        assert!(a.error_estimate < 1e-10);
    }
}

#[test]
fn detuned_integral_is_the_unit_weight_sum() {
    for (alpha, nu) in [(5.0, 0.2), (3.0, 1.0), (6.0, 0.05)] {
        let params = ModelParams::from_nu(alpha, nu).unwrap();
        for t in [0.5, 4.0, 20.0, 37.0] {
            let path = build_path(alpha, params.tau(t), nu, &PathOptions::default()).unwrap();
            let c = inversion_contour_detuned(&params, t, &path).unwrap().value;
            let expect = unit_weight_sum(alpha, params.mu(), t);
            assert!((c - expect).abs() < 1e-11, "alpha = {alpha}, nu = {nu}, t = {t}: {c} vs {expect}");
        }
    }
}

#[test]
fn loop_representation_of_cosine() {
    let path = build_default_path(5.0, 1.0).unwrap();
    for x in [0.0, 0.5, 3.0, -7.5, 10.0] {
        assert!((cos_via_hankel(x, &path).unwrap() - f64::cos(x)).abs() < 1e-12, "x = {x}");
    }
    assert!(cos_via_hankel(11.0, &path).is_err());
}

#[test]
fn initial_time_bypasses_quadrature() {
    let path = build_default_path(5.0, 0.0).unwrap();
    let v = inversion_contour_resonant(5.0, 0.0, &path).unwrap();
    assert_eq!(v.value, -1.0);
    assert_eq!(v.nodes, 0);
}

#[test]
fn invalid_input_is_rejected() {
    assert!(build_default_path(-1.0, 1.0).is_err());
    assert!(build_default_path(5.0, f64::NAN).is_err());
    let path = build_default_path(5.0, 1.0).unwrap();
    assert!(inversion_contour_resonant(5.0, -1.0, &path).is_err());
    assert!(build_path(5.0, 1.0, 0.0, &PathOptions { ray_angle: 2.0, ..PathOptions::default() }).is_err());
}

#[test]
fn path_geometry_is_consistent() {
    let path = build_default_path(5.0, 4.0).unwrap();
    path.validate().unwrap();
    assert!(path.radius() > 0.0);
    assert!(path.arm_length() > 0.0);
    assert_eq!(path.nodes().len() % 2, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_times_agree_with_the_sum(alpha in 0.5f64..8.0, t in 0.001f64..60.0) {
        let d = PhotonDistribution::poisson(alpha, DEFAULT_TAIL_TOLERANCE).unwrap();
        let params = ModelParams::resonant(alpha).unwrap();
        let c = inversion_contour(&params, t, &PathOptions::default()).unwrap();
        let e = inversion_exact_resonant(&d, t).unwrap();
        prop_assert!((c.value - e).abs() < 1e-10, "{} vs {}", c.value, e);
        prop_assert!(c.error_estimate < 1e-8);
    }
}
