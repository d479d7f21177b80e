use jcsum::exact::{inversion_exact, ModelParams, PhotonDistribution, DEFAULT_TAIL_TOLERANCE};
use jcsum::lambert::BranchIndex;
use jcsum::saddle::{
    crossing_times, default_tau_grid, inversion_saddle, revival_times, saddle_at, saddle_residual, trace_trajectory,
    Policy, SaddleSet,
};
use num_complex::Complex64 as C;
use proptest::prelude::*;
use std::f64::consts::PI;

fn labels(ns: &[i32]) -> Vec<BranchIndex> {
    ns.iter().map(|&n| BranchIndex::new(n)).collect()
}

/// `−Σ W_n cos(2√(μ+n) t)`, the sum the detuned saddles approximate.
fn unit_weight_sum(d: &PhotonDistribution, mu: f64, t: f64) -> f64 {
    -d.weights().iter().enumerate().map(|(n, w)| w * (2.0 * (mu + n as f64).sqrt() * t).cos()).sum::<f64>()
}

fn max_gap(alpha: f64, nu: f64, ns: &[i32], ts: impl Iterator<Item = f64>) -> f64 {
    let params = ModelParams::from_nu(alpha, nu).unwrap();
    let d = PhotonDistribution::poisson(alpha, DEFAULT_TAIL_TOLERANCE).unwrap();
    let reference =
        |t| if nu == 0.0 { inversion_exact(&d, &params, t).unwrap() } else { unit_weight_sum(&d, params.mu(), t) };
    let b = labels(ns);
    let ts: Vec<f64> = ts.collect();
    let tau_max = params.tau(ts.iter().cloned().fold(0.0, f64::max)) * 1.01;
    let set = SaddleSet::trace(nu, &b, tau_max).unwrap();
    ts.iter()
        .map(|&t| {
            let s = inversion_saddle(&params, t, &set, &b, Policy::Sum).unwrap().total;
            (s - reference(t)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn first_trajectory_passes_its_anchor() {
    let f = saddle_at(BranchIndex::new(1), 0.0, 4.0 * PI * PI).unwrap();
    assert!((f - C::new(0.0, PI)).norm() < 1e-10, "{f}");
    let f = saddle_at(BranchIndex::new(2), 0.0, 16.0 * PI * PI).unwrap();
    assert!((f - C::new(0.0, 2.0 * PI)).norm() < 1e-10, "{f}");
}

#[test]
fn imaginary_phase_grows_linearly_near_revivals() {
    for n in 1..=3u32 {
        let traj =
            trace_trajectory(BranchIndex::new(n as i32), 0.0, &default_tau_grid(1.3 * (2.0 * PI * n as f64).powi(2)))
                .unwrap();
        for x in [0.9, 1.0, 1.1] {
            let tau = x * (2.0 * PI * n as f64).powi(2);
            let s = traj.solve_at(tau).unwrap();
            let expect = tau / (2.0 * PI * n as f64);
            assert!((s.phi.im - expect).abs() < 0.02 * expect, "n = {n}, x = {x}: {} vs {expect}", s.phi.im);
        }
    }
}

#[test]
fn principal_saddle_tracks_the_exact_sum_through_the_collapse() {
    let gap = max_gap(5.0, 0.0, &[0], (1..=300).map(|k| 0.01 * k as f64));
    assert!(gap < 2e-2, "{gap}");
}

#[test]
fn trajectory_sum_tracks_the_exact_sum_through_revivals() {
    let gap = max_gap(5.0, 0.0, &[0, 1, 2, 3, 4], (0..=400).map(|k| 5.0 + 0.1 * k as f64));
    assert!(gap < 1e-2, "{gap}");
    let gap = max_gap(5.0, 0.2, &[0, 1, 2, 3, 4], (0..=400).map(|k| 5.0 + 0.1 * k as f64));
    assert!(gap < 1e-2, "{gap}");
}

#[test]
fn conjugate_labels_give_the_same_value() {
    let params = ModelParams::resonant(5.0).unwrap();
    let set = SaddleSet::trace(0.0, &labels(&[0, 1, 2]), 100.0).unwrap();
    for t in [3.0, 30.0, 45.0] {
        let a = inversion_saddle(&params, t, &set, &labels(&[0, 1, 2]), Policy::Sum).unwrap().total;
        let b = inversion_saddle(&params, t, &set, &labels(&[0, -1, -2, 2]), Policy::Sum).unwrap().total;
        assert_eq!(a, b);
    }
}

#[test]
fn policies_and_initial_value() {
    let params = ModelParams::resonant(5.0).unwrap();
    let b = labels(&[0, 1, 2, 3]);
    let set = SaddleSet::trace(0.0, &b, 100.0).unwrap();
    let v = inversion_saddle(&params, 31.0, &set, &b, Policy::Max).unwrap();
    assert_eq!(v.contributions.iter().filter(|c| c.included).count(), 1);
    let best = v.contributions.iter().find(|c| c.included).unwrap();
    assert_eq!(best.branch, BranchIndex::new(1));
    assert_eq!(inversion_saddle(&params, 0.0, &set, &b, Policy::Sum).unwrap().total, -1.0);
    assert!(inversion_saddle(&params, -1.0, &set, &b, Policy::Sum).is_err());
    let detuned = ModelParams::from_nu(5.0, 0.2).unwrap();
    assert!(inversion_saddle(&detuned, 1.0, &set, &b, Policy::Sum).is_err());
}

#[test]
fn crossing_times_follow_the_closed_form() {
    let c = crossing_times(5.0, 4).unwrap();
    assert!((c[0].scaled_formula - 8.0 * PI / 3.0).abs() < 1e-14);
    for x in &c {
        let n = x.n as f64;
        assert!(x.scaled_refined > 2.0 * PI * n && x.scaled_refined < 2.0 * PI * (n + 1.0));
        assert!((x.scaled_refined - x.scaled_formula).abs() < 0.1 * x.scaled_formula, "{x:?}");
        assert_eq!(x.refined, 5.0 * x.scaled_refined);
    }
    let r = revival_times(5.0, 0.2, 2);
    assert!((r[1] - 20.0 * PI * 1.2f64.sqrt()).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn saddles_solve_the_equation_and_decay(n in 0i32..=4, x in 0.05f64..1.5, nu in prop_oneof![Just(0.0), 0.0f64..0.5]) {
        let tau = x * (2.0 * PI * n.max(1) as f64).powi(2);
        let traj = trace_trajectory(BranchIndex::new(n), nu, &default_tau_grid(tau * 1.01)).unwrap();
        let s = traj.solve_at(tau).unwrap();
        prop_assert!(saddle_residual(s.f, tau, nu).norm() < 1e-9 * tau.max(1.0));
        prop_assert!(s.phi.re <= 1e-9, "Re phi = {}", s.phi.re);
    }
}
