use jcsum::asymptotics::{
    collapse_descriptor, collapse_detuned, collapse_resonant, revival_detuned, revival_detuned_descriptor,
    revival_resonant, revival_resonant_descriptor, RevivalMode,
};
use jcsum::exact::ModelParams;
use jcsum::lambert::BranchIndex;
use jcsum::saddle::{inversion_saddle, Policy, SaddleSet};
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn collapse_phase_is_linear_with_slope_two_alpha() {
    let d = collapse_descriptor(5.0, 0.0);
    assert_eq!(d.phase_coefficients, (0.0, 10.0, 0.0));
    assert_eq!(d.center_time, 0.0);
    for t in [0.0, 0.4, 2.5] {
        assert!((d.evaluate(t) - collapse_resonant(5.0, t)).abs() < 1e-15);
        assert!((collapse_descriptor(5.0, 0.3).evaluate(t) - collapse_detuned(5.0, 0.3, t)).abs() < 1e-15);
    }
}

#[test]
fn envelopes_are_symmetric_about_their_centres() {
    for n in 1..=4 {
        for mode in [RevivalMode::Full, RevivalMode::Simplified] {
            let d = revival_resonant_descriptor(5.0, n, mode).unwrap();
            for dt in [0.5, 3.0, 11.0] {
                assert!((d.envelope(d.center_time + dt) - d.envelope(d.center_time - dt)).abs() < 1e-15);
            }
        }
        let d = revival_detuned_descriptor(5.0, 0.2, n).unwrap();
        assert!((d.envelope(d.center_time + 2.0) - d.envelope(d.center_time - 2.0)).abs() < 1e-15);
    }
}

#[test]
fn descriptors_reproduce_the_closed_forms() {
    for n in 1..=3 {
        for mode in [RevivalMode::Full, RevivalMode::Simplified] {
            let d = revival_resonant_descriptor(5.0, n, mode).unwrap();
            for t in [d.center_time - 4.0, d.center_time, d.center_time + 1.3] {
                let v = revival_resonant(5.0, n, t, mode).unwrap();
                assert!((d.evaluate(t) - v).abs() < 1e-9, "n = {n}, {mode:?}, t = {t}");
            }
        }
    }
    let d = revival_resonant_descriptor(5.0, 1, RevivalMode::Full).unwrap();
    assert!((d.prefactor - (1.0 + PI * PI).powf(-0.25)).abs() < 1e-15);
    assert!((d.prefactor - 0.550_74).abs() < 1e-5);
    assert!((d.center_time - 10.0 * PI).abs() < 1e-12);
}

#[test]
fn detuned_revival_reduces_to_the_resonant_form() {
    for n in 1..=3 {
        let d = revival_detuned_descriptor(5.0, 0.0, n).unwrap();
        let r = revival_resonant_descriptor(5.0, n, RevivalMode::Simplified).unwrap();
        assert!((d.center_time - r.center_time).abs() < 1e-12);
        assert!((d.prefactor - r.prefactor).abs() < 1e-15);
        assert!((d.width - r.width).abs() < 1e-12);
    }
    assert!(revival_resonant(5.0, 0, 1.0, RevivalMode::Full).is_err());
    assert!(revival_detuned(5.0, -0.1, 1, 1.0).is_err());
}

#[test]
fn simplified_revival_matches_the_single_saddle() {
    let alpha = 5.0;
    let params = ModelParams::resonant(alpha).unwrap();
    for n in 1..=2u32 {
        let b = [BranchIndex::new(n as i32)];
        let d = revival_resonant_descriptor(alpha, n, RevivalMode::Simplified).unwrap();
        let set = SaddleSet::trace(0.0, &b, params.tau(d.center_time + d.width) * 1.01).unwrap();
        let ts = (0..=200).map(|j| d.center_time - d.width + 2.0 * d.width * j as f64 / 200.0);
        let gap = ts
            .map(|t| {
                let s = inversion_saddle(&params, t, &set, &b, Policy::Sum).unwrap().contributions[0].amplitude;
                (s - d.envelope(t)).abs()
            })
            .fold(0.0, f64::max);
        assert!(gap < 1e-2, "n = {n}: {gap}");
    }
}

proptest! {
    #[test]
    fn magnitude_never_exceeds_the_prefactor(n in 1u32..6, alpha in 1.0f64..10.0, nu in 0.0f64..1.0, x in -3.0f64..3.0) {
        let d = revival_resonant_descriptor(alpha, n, RevivalMode::Full).unwrap();
        let t = d.center_time + x * d.width;
        prop_assert!(revival_resonant(alpha, n, t, RevivalMode::Full).unwrap().abs() <= d.prefactor);
        let e = revival_detuned_descriptor(alpha, nu, n).unwrap();
        let t = e.center_time + x * e.width;
        prop_assert!(revival_detuned(alpha, nu, n, t).unwrap().abs() <= e.prefactor);
        prop_assert!(collapse_detuned(alpha, nu, x.abs()).abs() <= 1.0);
    }
}

#[test]
fn detuned_collapse_tracks_the_unit_weight_sum() {
    use jcsum::exact::{inversion_exact, static_part, PhotonDistribution, DEFAULT_TAIL_TOLERANCE};
    let (alpha, nu) = (5.0, 0.2);
    let p = ModelParams::from_nu(alpha, nu).unwrap();
    let d = PhotonDistribution::poisson(alpha, DEFAULT_TAIL_TOLERANCE).unwrap();
    let s = static_part(alpha, p.mu()).unwrap();
    let (mut unit, mut with_static) = (0.0f64, 0.0f64);
    for j in 0..=1500 {
        let t = 1.5 * j as f64 / 1500.0;
        let c = collapse_detuned(alpha, nu, t);
        let u: f64 =
            -d.weights().iter().enumerate().map(|(n, w)| w * (2.0 * (p.mu() + n as f64).sqrt() * t).cos()).sum::<f64>();
        unit = unit.max((c - u).abs());
        with_static = with_static.max((c + s - inversion_exact(&d, &p, t).unwrap()).abs());
    }
    assert!(unit < 0.05, "{unit}");
    // The exact sum carries weights n/(μ+n), so the formula plus the static
    // part misses it by the full static part at t = 0.
    assert!((with_static + s).abs() < 1e-12, "{with_static}");
}
