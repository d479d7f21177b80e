//! Acceptance gate: twelve numbered criteria, each reduced to measured
//! values compared against pinned limits.
//!
//! [`Tolerances::scaled`] shrinks or widens every limit at once; a factor of
//! zero is the negative control used by `selftest`.

use std::f64::consts::{E, PI};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use num_complex::Complex64 as C;
use rand::rngs::Xoshiro256PlusPlus;
use rand::{RngExt, SeedableRng};
use rayon::prelude::*;

use crate::asymptotics::{collapse_detuned, collapse_resonant, revival_detuned, revival_resonant, RevivalMode};
use crate::envelope::{argmax, argmin, linspace, rabi_period, sliding_envelope};
use crate::error::{Error, Result};
use crate::exact::{
    inversion_exact, inversion_exact_resonant, static_part, ModelParams, PhotonDistribution, TimeUnit,
    DEFAULT_TAIL_TOLERANCE,
};
use crate::hankel::{
    build_default_path, inversion_contour, inversion_contour_detuned, inversion_contour_resonant, PathOptions,
};
use crate::lambert::{
    branch_point_residual, branch_point_w0, critical_detuning, generalized_lambert, lambert_series, lambert_w_k,
    BranchIndex, GeneralizedLambertQuery,
};
use crate::run::{cmd_inversion, Method, RunConfig};
use crate::saddle::{default_tau_grid, inversion_saddle, saddle_residual, trace_trajectory, Policy, SaddleSet};

/// Identifiers of all criteria, in order.
pub const ALL: [u32; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

/// Seed of the random sample in criterion 4.
pub const SERIES_SEED: u64 = 0x5eed_0004;

/// Pinned limits of every criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub initial_condition: f64,
    pub contour_vs_exact: f64,
    pub lambert_residual: f64,
    pub lambert_branch_point: f64,
    pub series_vs_iterative: f64,
    pub saddle_residual: f64,
    pub saddle_re_phi: f64,
    pub collapse: f64,
    pub revival_peak_location: f64,
    pub revival_peak_magnitude: f64,
    pub second_third_envelope: f64,
    pub crossing_location: f64,
    pub detuned_contour_reduction: f64,
    pub detuned_closed_form_reduction: f64,
    pub detuned_envelope: f64,
    pub detuned_peak_location: f64,
    pub detuned_static_part: f64,
    pub generalized_residual: f64,
    pub branch_point_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            initial_condition: 1e-8,
            contour_vs_exact: 1e-6,
            lambert_residual: 1e-12,
            lambert_branch_point: 1e-6,
            series_vs_iterative: 1e-10,
            saddle_residual: 1e-10,
            saddle_re_phi: 1e-12,
            collapse: 0.02,
            revival_peak_location: 0.4,
            revival_peak_magnitude: 0.15,
            second_third_envelope: 0.05,
            crossing_location: 0.5,
            detuned_contour_reduction: 1e-10,
            detuned_closed_form_reduction: 1e-14,
            detuned_envelope: 0.07,
            detuned_peak_location: 0.02,
            detuned_static_part: 0.15,
            generalized_residual: 1e-12,
            branch_point_residual: 1e-12,
        }
    }
}

impl Tolerances {
    /// Every limit multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            initial_condition: self.initial_condition * factor,
            contour_vs_exact: self.contour_vs_exact * factor,
            lambert_residual: self.lambert_residual * factor,
            lambert_branch_point: self.lambert_branch_point * factor,
            series_vs_iterative: self.series_vs_iterative * factor,
            saddle_residual: self.saddle_residual * factor,
            saddle_re_phi: self.saddle_re_phi * factor,
            collapse: self.collapse * factor,
            revival_peak_location: self.revival_peak_location * factor,
            revival_peak_magnitude: self.revival_peak_magnitude * factor,
            second_third_envelope: self.second_third_envelope * factor,
            crossing_location: self.crossing_location * factor,
            detuned_contour_reduction: self.detuned_contour_reduction * factor,
            detuned_closed_form_reduction: self.detuned_closed_form_reduction * factor,
            detuned_envelope: self.detuned_envelope * factor,
            detuned_peak_location: self.detuned_peak_location * factor,
            detuned_static_part: self.detuned_static_part * factor,
            generalized_residual: self.generalized_residual * factor,
            branch_point_residual: self.branch_point_residual * factor,
        }
    }
}

/// One measured quantity and its limit.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub limit: f64,
    pub strict: bool,
    pub passed: bool,
}

impl Check {
    /// Passes when `measured < limit`.
    pub fn below(label: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self { label: label.into(), measured, limit, strict: true, passed: measured < limit }
    }

    /// Passes when `measured ≤ limit`.
    pub fn at_most(label: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self { label: label.into(), measured, limit, strict: false, passed: measured <= limit }
    }

    /// A yes/no condition, reported as 0 (holds) or 1 (fails) against 0.
    pub fn holds(label: impl Into<String>, ok: bool) -> Self {
        Self { label: label.into(), measured: if ok { 0.0 } else { 1.0 }, limit: 0.0, strict: false, passed: ok }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.strict { "<" } else { "<=" };
        write!(f, "{} = {:.3e} ({op} {:.1e})", self.label, self.measured, self.limit)
    }
}

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    pub elapsed: Duration,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} {verdict} {}:", self.id, self.title)?;
        if let Some(e) = &self.error {
            write!(f, " error: {e};")?;
        }
        let parts: Vec<String> =
            self.checks.iter().map(|c| format!("{}{c}", if c.passed { "" } else { "[x] " })).collect();
        write!(f, " {} [{:.2} s]", parts.join("; "), self.elapsed.as_secs_f64())
    }
}

pub fn title(id: u32) -> &'static str {
    match id {
        1 => "initial condition",
        2 => "contour vs exact sum (resonant)",
        3 => "Lambert W conformance",
        4 => "series vs iterative Lambert W",
        5 => "saddle residuals",
        6 => "collapse law",
        7 => "first revival centring",
        8 => "second and third revivals",
        9 => "detuned reduction at resonance",
        10 => "detuned first revival",
        11 => "generalized Lambert equation",
        12 => "determinism",
        _ => "unknown",
    }
}

/// Runs one criterion.
pub fn run_criterion(id: u32, tol: &Tolerances) -> CriterionReport {
    let start = Instant::now();
    let result = match id {
        1 => initial_condition(tol),
        2 => contour_vs_exact(tol),
        3 => lambert_conformance(tol),
        4 => series_vs_iterative(tol),
        5 => saddle_residuals(tol),
        6 => collapse(tol),
        7 => first_revival(tol),
        8 => second_third_revivals(tol),
        9 => detuned_reduction(tol),
        10 => detuned_revival(tol),
        11 => generalized(tol),
        12 => determinism(),
        _ => Err(Error::InvalidParameter(format!("no criterion {id}"))),
    };
    let (checks, error) = match result {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    CriterionReport { id, title: title(id), checks, error, elapsed: start.elapsed() }
}

/// Runs the given criteria in order.
pub fn run(ids: &[u32], tol: &Tolerances) -> Vec<CriterionReport> {
    ids.iter().map(|&id| run_criterion(id, tol)).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn initial_condition(tol: &Tolerances) -> Result<Vec<Check>> {
    let mut worst: [f64; 3] = [0.0; 3];
    for alpha in [1.0, 5.0, 10.0] {
        for nu in [0.0, 0.2] {
            let params = ModelParams::from_nu(alpha, nu)?;
            let dist = PhotonDistribution::poisson(alpha, DEFAULT_TAIL_TOLERANCE)?;
            let e = inversion_exact(&dist, &params, 0.0)?;
            let c = inversion_contour(&params, 0.0, &PathOptions::default())?.value;
            let set = SaddleSet::trace(nu, &[BranchIndex::PRINCIPAL], 1.0)?;
            let s = inversion_saddle(&params, 0.0, &set, &[BranchIndex::PRINCIPAL], Policy::Sum)?.total;
            for (w, v) in worst.iter_mut().zip([e, c, s]) {
                *w = w.max((v + 1.0).abs());
            }
        }
    }
    Ok(vec![
        Check::below("max|exact+1|", worst[0], tol.initial_condition),
        Check::below("max|contour+1|", worst[1], tol.initial_condition),
        Check::below("max|saddle+1|", worst[2], tol.initial_condition),
    ])
}

fn contour_vs_exact(tol: &Tolerances) -> Result<Vec<Check>> {
    let alpha = 5.0;
    let dist = PhotonDistribution::poisson(alpha, DEFAULT_TAIL_TOLERANCE)?;
    let grid = linspace(0.01, 45.0, 500);
    let diffs: Vec<f64> = grid
        .iter()
        .map(|&t| -> Result<f64> {
            let path = build_default_path(alpha, (t / alpha).powi(2))?;
            let c = inversion_contour_resonant(alpha, t, &path)?.value;
            Ok((c - inversion_exact_resonant(&dist, t)?).abs())
        })
        .collect::<Result<_>>()?;
    Ok(vec![Check::below(
        "max|contour-exact| (500 pts, t in [0.01, 45])",
        diffs.iter().copied().fold(0.0, f64::max),
        tol.contour_vs_exact,
    )])
}

fn lambert_conformance(tol: &Tolerances) -> Result<Vec<Check>> {
    let radii = (0..10).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 9.0));
    let angles: Vec<f64> = (0..10).map(|j| -PI + (j as f64 + 0.5) * 2.0 * PI / 10.0).collect();
    let grid: Vec<C> = radii.flat_map(|r| angles.iter().map(move |&a| C::from_polar(r, a))).collect();
    let mut worst: f64 = 0.0;
    for k in -5..=5 {
        for &u in &grid {
            let w = lambert_w_k(k, u)?;
            worst = worst.max((w * w.exp() - u).norm() / u.norm().max(1.0));
        }
    }
    let m = C::new(-1.0 / E, 0.0);
    let bp = (lambert_w_k(0, m)? + 1.0).norm().max((lambert_w_k(-1, m)? + 1.0).norm());
    Ok(vec![
        Check::at_most("max residual/max(1,|u|) (k in -5..5, 100 pts each)", worst, tol.lambert_residual),
        Check::below("max|W(-1/e)+1| (k = 0, -1)", bp, tol.lambert_branch_point),
    ])
}

fn series_vs_iterative(tol: &Tolerances) -> Result<Vec<Check>> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(SERIES_SEED);
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    for _ in 0..50 {
        // Uniform in the disc |u| < 0.3.
        let r = 0.3 * rng.random::<f64>().sqrt();
        let u = C::from_polar(r, 2.0 * PI * rng.random::<f64>());
        let d = (lambert_series(u, 40)? - lambert_w_k(0, u)?).norm();
        if d > worst {
            worst = d;
            at = r;
        }
    }
    Ok(vec![Check::below(
        format!("max|series40-W0| (50 random u, worst at |u| = {at:.3})"),
        worst,
        tol.series_vs_iterative,
    )])
}

fn saddle_residuals(tol: &Tolerances) -> Result<Vec<Check>> {
    let grid = default_tau_grid(250.0);
    let jobs: Vec<(i32, f64)> = (-3..=3).flat_map(|k| [0.0, 0.2].map(|nu| (k, nu))).collect();
    let worst: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(k, nu)| -> Result<(f64, f64)> {
            let traj = trace_trajectory(BranchIndex::new(k), nu, &grid)?;
            let mut res: f64 = 0.0;
            let mut re: f64 = f64::NEG_INFINITY;
            for x in traj.samples() {
                res = res.max(saddle_residual(x.f, x.tau, nu).norm() / (x.tau / 4.0).max(1.0));
                re = re.max(x.phi.re);
            }
            Ok((res, re))
        })
        .collect::<Result<_>>()?;
    let res = worst.iter().map(|w| w.0).fold(0.0, f64::max);
    let re = worst.iter().map(|w| w.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        Check::below("max residual/max(1,tau/4) (|k| <= 3, tau in (0, 250])", res, tol.saddle_residual),
        Check::at_most("max Re phi", re, tol.saddle_re_phi),
    ])
}

fn collapse(tol: &Tolerances) -> Result<Vec<Check>> {
    let alpha = 5.0;
    let dist = PhotonDistribution::poisson(alpha, DEFAULT_TAIL_TOLERANCE)?;
    let mut worst: f64 = 0.0;
    for t in linspace(0.0, 1.5, 1501) {
        worst = worst.max((collapse_resonant(alpha, t) - inversion_exact_resonant(&dist, t)?).abs());
    }
    Ok(vec![Check::below("max|collapse-exact| (t in [0, 1.5])", worst, tol.collapse)])
}

fn exact_series(dist: &PhotonDistribution, params: &ModelParams, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter().map(|&t| inversion_exact(dist, params, t)).collect()
}

fn first_revival(tol: &Tolerances) -> Result<Vec<Check>> {
    let alpha = 5.0;
    let params = ModelParams::resonant(alpha)?;
    let dist = PhotonDistribution::poisson(alpha, DEFAULT_TAIL_TOLERANCE)?;
    let grid = linspace(15.0, 50.0, 7001);
    let env = sliding_envelope(&grid, &exact_series(&dist, &params, &grid)?, rabi_period(alpha, 0.0))?;
    let i = argmax(&env).expect("non-empty grid");
    let expected = (1.0 + PI * PI).powf(-0.25);
    Ok(vec![
        Check::at_most("|t_peak/alpha - 2pi|", (grid[i] / alpha - 2.0 * PI).abs(), tol.revival_peak_location),
        Check::at_most("|peak/(1+pi^2)^(-1/4) - 1|", (env[i] / expected - 1.0).abs(), tol.revival_peak_magnitude),
    ])
}

fn second_third_revivals(tol: &Tolerances) -> Result<Vec<Check>> {
    let alpha = 5.0;
    let params = ModelParams::resonant(alpha)?;
    let dist = PhotonDistribution::poisson(alpha, DEFAULT_TAIL_TOLERANCE)?;
    let grid = linspace(12.0 * alpha, 22.0 * alpha, 10001);
    let branches = [BranchIndex::new(2), BranchIndex::new(3)];
    let set = SaddleSet::trace(0.0, &branches, params.tau(22.0 * alpha))?;
    let approx: Vec<f64> = grid
        .iter()
        .map(|&t| inversion_saddle(&params, t, &set, &branches, Policy::Sum).map(|v| v.total))
        .collect::<Result<_>>()?;
    let window = rabi_period(alpha, 0.0);
    let env_e = sliding_envelope(&grid, &exact_series(&dist, &params, &grid)?, window)?;
    let env_s = sliding_envelope(&grid, &approx, window)?;

    // Minimum between the second and third revival centres.
    let (lo, hi) = (grid.partition_point(|&t| t < 4.0 * PI * alpha), grid.partition_point(|&t| t <= 6.0 * PI * alpha));
    let crossing = 4.0 * PI * 2.0 * 3.0 / 5.0;
    let min_e = grid[lo + argmin(&env_e[lo..hi]).expect("non-empty")] / alpha;
    let min_s = grid[lo + argmin(&env_s[lo..hi]).expect("non-empty")] / alpha;
    Ok(vec![
        Check::below(
            "max|env(saddle 2+3) - env(exact)| (t/alpha in [12, 22])",
            max_abs_diff(&env_e, &env_s),
            tol.second_third_envelope,
        ),
        Check::at_most("|exact envelope minimum - 15.08| (t/alpha)", (min_e - crossing).abs(), tol.crossing_location),
        Check::at_most("|saddle envelope minimum - 15.08| (t/alpha)", (min_s - crossing).abs(), tol.crossing_location),
    ])
}

fn detuned_reduction(tol: &Tolerances) -> Result<Vec<Check>> {
    let alpha = 5.0;
    let params = ModelParams::from_nu(alpha, 0.0)?;
    let grid = linspace(0.05, 45.0, 100);
    let contour = grid
        .iter()
        .map(|&t| -> Result<f64> {
            let path = build_default_path(alpha, params.tau(t))?;
            let a = inversion_contour_detuned(&params, t, &path)?.value;
            let b = inversion_contour_resonant(alpha, t, &path)?.value;
            Ok((a - b).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut closed: f64 = 0.0;
    for &t in &grid {
        closed = closed.max((collapse_detuned(alpha, 0.0, t) - collapse_resonant(alpha, t)).abs());
        for n in 1..=3 {
            let d = revival_detuned(alpha, 0.0, n, t)? - revival_resonant(alpha, n, t, RevivalMode::Simplified)?;
            closed = closed.max(d.abs());
        }
    }
    Ok(vec![
        Check::below("max|contour(nu=0) - contour resonant| (100 pts)", contour, tol.detuned_contour_reduction),
        Check::at_most("max closed-form gap at nu = 0", closed, tol.detuned_closed_form_reduction),
    ])
}

fn detuned_revival(tol: &Tolerances) -> Result<Vec<Check>> {
    let (alpha, nu) = (5.0, 0.2);
    let params = ModelParams::from_nu(alpha, nu)?;
    let dist = PhotonDistribution::poisson(alpha, DEFAULT_TAIL_TOLERANCE)?;
    let period = params.revival_period();
    let scaled = linspace(0.6, 1.4, 8001);
    let grid: Vec<f64> = scaled.iter().map(|&v| params.to_lambda_t(v, TimeUnit::TOverT)).collect();
    let stat = static_part(alpha, params.mu())?;
    let approx: Vec<f64> =
        grid.iter().map(|&t| revival_detuned(alpha, nu, 1, t).map(|v| v + stat)).collect::<Result<_>>()?;
    let window = rabi_period(alpha, params.mu());
    let env_e = sliding_envelope(&grid, &exact_series(&dist, &params, &grid)?, window)?;
    let env_a = sliding_envelope(&grid, &approx, window)?;
    let peak_e = grid[argmax(&env_e).expect("non-empty")] / period;
    let peak_a = grid[argmax(&env_a).expect("non-empty")] / period;
    Ok(vec![
        Check::below(
            "max|env(revival+static) - env(exact)| (t/T in [0.6, 1.4])",
            max_abs_diff(&env_e, &env_a),
            tol.detuned_envelope,
        ),
        Check::at_most("|exact envelope peak t/T - 1|", (peak_e - 1.0).abs(), tol.detuned_peak_location),
        Check::at_most("|approximate envelope peak t/T - 1|", (peak_a - 1.0).abs(), tol.detuned_peak_location),
        Check::at_most("|static_part/(-0.2) - 1|", (stat / -0.2 - 1.0).abs(), tol.detuned_static_part),
    ])
}

fn generalized(tol: &Tolerances) -> Result<Vec<Check>> {
    let mut worst: f64 = 0.0;
    for q in 0..200u32 {
        let k = (q % 7) as i32 - 3;
        let nu = if (q / 7) % 2 == 0 { 0.05 } else { 0.2 };
        // Radii spread over [10^-0.5, 10^1.5], angles by the golden-ratio
        // sequence. Below |u| ~ 0.3 the high branches sit next to the zeros of
        // ν + e^{2w} and the attainable residual exceeds the limit.
        let r = 10f64.powf(-0.5 + 2.0 * ((q as f64 * 0.381_966_011_250_105).fract()));
        let theta = PI * (2.0 * (q as f64 * 0.618_033_988_749_895).fract() - 1.0);
        let u = C::from_polar(r, theta);
        let sol = generalized_lambert(&GeneralizedLambertQuery { u, nu, branch: BranchIndex::new(k) }, None)?;
        let v = sol.sqrt_sign * sol.w * (nu + (2.0 * sol.w).exp()).sqrt();
        worst = worst.max((v - u).norm() / u.norm().max(1.0));
    }
    let mut bp: f64 = 0.0;
    for nu in [0.001, 0.01, 0.02] {
        let b = branch_point_w0(nu, 60)?;
        bp = bp.max(branch_point_residual(nu, b.w0));
    }
    let nu0 = format!("{:.6}", critical_detuning());
    Ok(vec![
        Check::below("max residual/max(1,|u|) (200 queries)", worst, tol.generalized_residual),
        Check::below("max branch-point residual (nu = 0.001, 0.01, 0.02)", bp, tol.branch_point_residual),
        Check::holds(format!("nu0 = {nu0} (expected 0.024894)"), nu0 == "0.024894"),
    ])
}

fn determinism() -> Result<Vec<Check>> {
    static RUN: AtomicU64 = AtomicU64::new(0);
    let dir = std::env::temp_dir();
    let tag = format!("{}-{}", std::process::id(), RUN.fetch_add(1, Ordering::Relaxed));
    let paths =
        [dir.join(format!("jcsum-determinism-{tag}-a.csv")), dir.join(format!("jcsum-determinism-{tag}-b.csv"))];
    let mut bytes = Vec::new();
    for p in &paths {
        let cfg = RunConfig {
            alpha: 5.0,
            methods: vec![Method::Exact, Method::Contour, Method::Saddle, Method::Collapse, Method::Revival],
            branches: vec![0, 1, 2, 3],
            t_stop: 40.0,
            t_count: 81,
            per_branch: true,
            out: Some(p.clone()),
            ..RunConfig::default()
        };
        cmd_inversion(&cfg)?;
        bytes.push(std::fs::read(p)?);
        let _ = std::fs::remove_file(p);
    }
    Ok(vec![Check::holds(format!("two runs byte-identical ({} bytes)", bytes[0].len()), bytes[0] == bytes[1])])
}
