//! Saddle-point trajectories and the asymptotic inversion.
//!
//! In the variable `F = −1/(2z)` the saddles of `Φ(z, ν)` solve
//!
//! ```text
//! G(F, τ) = τ/4 + F²(ν + e^{2F}) = 0,
//! ```
//!
//! i.e. `F = W(iτ^{1/2}/2, ν)` on some branch. Trajectory `n ≥ 1` passes
//! through `F = iπn` at `τ_n = 4π²n²(1 + ν)`, where its phase has
//! `Re φ = 0` and it produces the `n`-th revival. Trajectory `0` starts at
//! `F = 0` and produces the collapse. At `ν = 0`, trajectory `n` lies on the
//! Lambert branch `W_{⌈n/2⌉}` of `±iτ^{1/2}/2`, see [`lambert_branch`].
//!
//! Each trajectory contributes
//!
//! ```text
//! −|f|^{−1/2} e^{|α|² Re φ} cos(|α|² Im φ − ½ arg f)
//! ```
//!
//! with `φ = −τ/2F + 2Fν + e^{2F} − 1` and `f = 1 + F + 4F³ν/τ`. The complex
//! conjugate trajectory gives the same real contribution.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::ModelParams;
use crate::lambert::{generalized_series, BranchIndex};

type C = Complex64;

/// Largest continuation step in `s = τ^{1/2}`.
pub const MAX_STEP: f64 = 1e-2;

/// Contributions with `|α|² Re φ` below this are dropped by [`Policy::Sum`].
pub const AMPLITUDE_CUTOFF: f64 = -30.0;

const SERIES_TERMS: usize = 30;

/// `φ = −τ/(2F) + e^{2F} − 1`.
pub fn phi_resonant(f: C, tau: f64) -> Result<C> {
    phi_detuned(f, tau, 0.0)
}

/// `φ_ν = −τ/(2F) + 2Fν + e^{2F} − 1`.
pub fn phi_detuned(f: C, tau: f64, nu: f64) -> Result<C> {
    if f == C::new(0.0, 0.0) {
        return Err(Error::Domain("phase is singular at F = 0".into()));
    }
    let mut v = -tau / (2.0 * f) + (2.0 * f).exp() - 1.0;
    if nu != 0.0 {
        v += 2.0 * f * nu;
    }
    Ok(v)
}

/// `f_ν = 1 + F + 4F³ν/τ`.
pub fn curvature_factor(f: C, tau: f64, nu: f64) -> C {
    if nu == 0.0 {
        return 1.0 + f;
    }
    1.0 + f + 4.0 * f * f * f * nu / tau
}

/// `τ/4 + F²(ν + e^{2F})`.
pub fn saddle_residual(f: C, tau: f64, nu: f64) -> C {
    tau / 4.0 + f * f * (nu + (2.0 * f).exp())
}

fn saddle_derivative(f: C, nu: f64) -> C {
    let e2 = (2.0 * f).exp();
    2.0 * f * (nu + e2) + 2.0 * f * f * e2
}

fn residual_bound(tau: f64) -> f64 {
    1e-10 * (tau / 4.0).max(1.0)
}

/// Standard Lambert branch and sign of `u` carrying trajectory `n` at
/// resonance: `F e^F = sign · iτ^{1/2}/2` on `W_k`.
pub fn lambert_branch(n: u32) -> (i32, f64) {
    if n.is_multiple_of(2) {
        ((n / 2) as i32, 1.0)
    } else {
        (n.div_ceil(2) as i32, -1.0)
    }
}

/// Trajectory label and conjugation of a branch index. Negative `k` denotes
/// the conjugate of trajectory `|k|`.
pub fn trajectory_label(b: BranchIndex) -> (u32, bool) {
    (b.k.unsigned_abs(), (b.k < 0) != b.conjugate_copy)
}

/// One point on a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub tau: f64,
    pub f: C,
    pub phi: C,
    pub curvature: C,
}

impl TrajectorySample {
    fn new(s: f64, f: C, nu: f64) -> Self {
        let tau = s * s;
        Self {
            tau,
            f,
            phi: phi_detuned(f, tau, nu).unwrap_or(C::new(0.0, 0.0)),
            curvature: if tau > 0.0 { curvature_factor(f, tau, nu) } else { C::new(1.0, 0.0) },
        }
    }

    fn conj(self) -> Self {
        Self { tau: self.tau, f: self.f.conj(), phi: self.phi.conj(), curvature: self.curvature.conj() }
    }
}

/// Saddle positions along one trajectory, sampled at increasing `τ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleTrajectory {
    branch: BranchIndex,
    nu: f64,
    samples: Vec<TrajectorySample>,
}

/// Newton on `G(·, s²)`. Returns the root and the iteration count.
fn newton(f0: C, s: f64, nu: f64) -> Option<(C, usize)> {
    let tau = s * s;
    let bound = 1e-3 * residual_bound(tau);
    let mut f = f0;
    for it in 0..30 {
        let g = saddle_residual(f, tau, nu);
        if g.norm() <= bound {
            return Some((f, it));
        }
        let df = g / saddle_derivative(f, nu);
        if !(df.re.is_finite() && df.im.is_finite()) {
            return None;
        }
        f -= df;
        if df.norm() <= 1e-16 * (1.0 + f.norm()) {
            let ok = saddle_residual(f, tau, nu).norm() <= residual_bound(tau);
            return ok.then_some((f, it + 1));
        }
    }
    None
}

fn slope(f: C, s: f64, nu: f64) -> C {
    -(s / 2.0) / saddle_derivative(f, nu)
}

/// Continues a saddle from `(s0, f0)` to `s1`, returning the solution there.
fn continue_to(mut s: f64, mut f: C, s1: f64, nu: f64) -> Result<C> {
    let dir = if s1 >= s { 1.0 } else { -1.0 };
    let mut h = MAX_STEP.min((s1 - s).abs());
    while (s1 - s) * dir > 0.0 {
        h = h.min((s1 - s).abs()).min(MAX_STEP);
        let target = if (s1 - s).abs() <= h { s1 } else { s + dir * h };
        let d = target - s;
        // Heun predictor.
        let k1 = slope(f, s, nu);
        let fe = f + k1 * d;
        let pred = f + 0.5 * d * (k1 + slope(fe, target, nu));
        let step = (pred - f).norm();
        match newton(pred, target, nu) {
            Some((g, it)) if it <= 8 && (g - pred).norm() <= 0.2 * step + 1e-9 * (1.0 + g.norm()) => {
                s = target;
                f = g;
                h *= if it <= 2 { 2.0 } else { 1.0 };
            }
            _ => {
                h *= 0.5;
                if h < 1e-13 * s.abs().max(1.0) {
                    return Err(Error::BranchJump { tau: s * s });
                }
            }
        }
    }
    Ok(f)
}

/// Starting point of trajectory `n` (unconjugated): `(s, F)`.
fn anchor(n: u32, nu: f64, s_first: f64) -> Result<(f64, C)> {
    if n == 0 {
        let s = s_first.clamp(1e-8, 0.05);
        let f = generalized_series(s * s, nu, SERIES_TERMS)?;
        let (f, _) =
            newton(f, s, nu).ok_or(Error::NoConvergence { what: "series start of trajectory 0".into(), last: f })?;
        Ok((s, f))
    } else {
        let nf = n as f64;
        Ok((2.0 * PI * nf * (1.0 + nu).sqrt(), C::new(0.0, PI * nf)))
    }
}

/// Solves trajectory `n` at `s = τ^{1/2}` by continuation from its anchor.
pub fn saddle_at(branch: BranchIndex, nu: f64, tau: f64) -> Result<C> {
    check_nu(nu)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    let (n, conj) = trajectory_label(branch);
    let s = tau.sqrt();
    let (s0, f0) = anchor(n, nu, s)?;
    let f = continue_to(s0, f0, s, nu)?;
    Ok(if conj { f.conj() } else { f })
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu must be finite and >= 0, got {nu}")));
    }
    Ok(())
}

/// Traces trajectory `branch` over an increasing grid of positive `τ`.
pub fn trace_trajectory(branch: BranchIndex, nu: f64, tau_grid: &[f64]) -> Result<SaddleTrajectory> {
    check_nu(nu)?;
    if tau_grid.is_empty() {
        return Err(Error::InvalidParameter("empty tau grid".into()));
    }
    if tau_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) || tau_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("tau grid must be positive and strictly increasing".into()));
    }
    let (n, conj) = trajectory_label(branch);
    let grid_s: Vec<f64> = tau_grid.iter().map(|t| t.sqrt()).collect();
    let (s0, f0) = anchor(n, nu, grid_s[0])?;
    let split = grid_s.partition_point(|&s| s < s0);

    let mut fs = vec![C::new(0.0, 0.0); grid_s.len()];
    let (mut s, mut f) = (s0, f0);
    for i in (0..split).rev() {
        f = continue_to(s, f, grid_s[i], nu)?;
        s = grid_s[i];
        fs[i] = f;
    }
    let (mut s, mut f) = (s0, f0);
    for i in split..grid_s.len() {
        f = continue_to(s, f, grid_s[i], nu)?;
        s = grid_s[i];
        fs[i] = f;
    }
    let samples = grid_s
        .iter()
        .zip(&fs)
        .map(|(&s, &f)| {
            let x = TrajectorySample::new(s, f, nu);
            if conj {
                x.conj()
            } else {
                x
            }
        })
        .collect();
    Ok(SaddleTrajectory { branch, nu, samples })
}

/// Grid `τ = (j·Δs)²`, `j = 1..`, with `Δs ≤ MAX_STEP`, reaching `tau_max`.
pub fn default_tau_grid(tau_max: f64) -> Vec<f64> {
    let s_max = tau_max.max(0.0).sqrt();
    let m = (s_max / MAX_STEP).ceil().max(1.0) as usize;
    let ds = s_max.max(MAX_STEP) / m as f64;
    (1..=m).map(|j| (j as f64 * ds).powi(2)).collect()
}

impl SaddleTrajectory {
    pub fn branch(&self) -> BranchIndex {
        self.branch
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    pub fn tau_range(&self) -> (f64, f64) {
        (self.samples[0].tau, self.samples[self.samples.len() - 1].tau)
    }

    fn bracket(&self, tau: f64) -> Result<usize> {
        let (lo, hi) = self.tau_range();
        if !(tau >= lo && tau <= hi) {
            return Err(Error::InterpolationGap { tau });
        }
        let i = self.samples.partition_point(|x| x.tau <= tau);
        Ok(i.clamp(1, self.samples.len().max(2) - 1))
    }

    /// Saddle at `τ`, from a Hermite guess between samples polished by Newton.
    pub fn solve_at(&self, tau: f64) -> Result<TrajectorySample> {
        if self.samples.len() == 1 {
            let x = self.samples[0];
            return if x.tau == tau { Ok(x) } else { Err(Error::InterpolationGap { tau }) };
        }
        let i = self.bracket(tau)?;
        let (a, b) = (self.samples[i - 1], self.samples[i]);
        if tau == a.tau {
            return Ok(a);
        }
        if tau == b.tau {
            return Ok(b);
        }
        let (sa, sb, s) = (a.tau.sqrt(), b.tau.sqrt(), tau.sqrt());
        let h = sb - sa;
        let x = (s - sa) / h;
        let (da, db) = (slope(a.f, sa, self.nu) * h, slope(b.f, sb, self.nu) * h);
        let x2 = x * x;
        let x3 = x2 * x;
        let guess = a.f * (2.0 * x3 - 3.0 * x2 + 1.0)
            + da * (x3 - 2.0 * x2 + x)
            + b.f * (-2.0 * x3 + 3.0 * x2)
            + db * (x3 - x2);
        let (f, _) = newton(guess, s, self.nu).ok_or(Error::BranchJump { tau })?;
        if (f - guess).norm() > 0.1 * (b.f - a.f).norm() + 1e-8 {
            return Err(Error::BranchJump { tau });
        }
        Ok(TrajectorySample::new(s, f, self.nu))
    }

    /// Monotone cubic interpolation of `φ` (real and imaginary parts
    /// separately) at `τ`, without re-solving.
    pub fn interpolate_phi(&self, tau: f64) -> Result<C> {
        let taus: Vec<f64> = self.samples.iter().map(|x| x.tau).collect();
        let re: Vec<f64> = self.samples.iter().map(|x| x.phi.re).collect();
        let im: Vec<f64> = self.samples.iter().map(|x| x.phi.im).collect();
        if self.samples.len() == 1 {
            return if taus[0] == tau { Ok(self.samples[0].phi) } else { Err(Error::InterpolationGap { tau }) };
        }
        self.bracket(tau)?;
        Ok(C::new(pchip(&taus, &re, tau), pchip(&taus, &im, tau)))
    }
}

/// Fritsch–Carlson monotone cubic interpolation at `x` inside `xs`.
pub fn pchip(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let i = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
    let secant = |j: usize| (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]);
    let slope_at = |j: usize| -> f64 {
        if j == 0 {
            return secant(0);
        }
        if j == n - 1 {
            return secant(n - 2);
        }
        let (d0, d1) = (secant(j - 1), secant(j));
        if d0 * d1 <= 0.0 {
            return 0.0;
        }
        let (h0, h1) = (xs[j] - xs[j - 1], xs[j + 1] - xs[j]);
        let (w0, w1) = (2.0 * h1 + h0, h1 + 2.0 * h0);
        (w0 + w1) / (w0 / d0 + w1 / d1)
    };
    let (x0, x1) = (xs[i - 1], xs[i]);
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (m0, m1) = (slope_at(i - 1) * h, slope_at(i) * h);
    let t2 = t * t;
    let t3 = t2 * t;
    ys[i - 1] * (2.0 * t3 - 3.0 * t2 + 1.0) + m0 * (t3 - 2.0 * t2 + t) + ys[i] * (-2.0 * t3 + 3.0 * t2) + m1 * (t3 - t2)
}

/// Traced trajectories for one detuning, keyed by trajectory label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleSet {
    nu: f64,
    trajectories: BTreeMap<u32, SaddleTrajectory>,
}

impl SaddleSet {
    /// Traces the given trajectories on [`default_tau_grid`]`(tau_max)`.
    pub fn trace(nu: f64, branches: &[BranchIndex], tau_max: f64) -> Result<Self> {
        use rayon::prelude::*;
        let grid = default_tau_grid(tau_max);
        let mut labels: Vec<u32> = branches.iter().map(|b| trajectory_label(*b).0).collect();
        labels.sort_unstable();
        labels.dedup();
        let traced: Result<Vec<_>> = labels
            .par_iter()
            .map(|&n| trace_trajectory(BranchIndex::new(n as i32), nu, &grid).map(|t| (n, t)))
            .collect();
        Ok(Self { nu, trajectories: traced?.into_iter().collect() })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn get(&self, n: u32) -> Option<&SaddleTrajectory> {
        self.trajectories.get(&n)
    }

    pub fn labels(&self) -> impl Iterator<Item = u32> + '_ {
        self.trajectories.keys().copied()
    }
}

/// How per-trajectory contributions are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Sum of all contributions with `|α|² Re φ` above the cutoff.
    #[default]
    Sum,
    /// The single contribution with the largest `Re φ`.
    Max,
}

/// One trajectory's term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contribution {
    pub branch: BranchIndex,
    /// `|f|^{−1/2} e^{|α|² Re φ}`.
    pub amplitude: f64,
    /// `|α|² Im φ − ½ arg f`.
    pub phase: f64,
    /// `|α|² Re φ`.
    pub exponent: f64,
    pub value: f64,
    pub included: bool,
}

/// Total and per-trajectory breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleValue {
    pub total: f64,
    pub contributions: Vec<Contribution>,
}

/// Term of one saddle: `−|f|^{−1/2} e^{|α|² Re φ} cos(|α|² Im φ − ½ arg f)`.
pub fn contribution(branch: BranchIndex, sample: &TrajectorySample, alpha: f64) -> Contribution {
    let a2 = alpha * alpha;
    let amplitude = (a2 * sample.phi.re).exp() / sample.curvature.norm().sqrt();
    let phase = a2 * sample.phi.im - 0.5 * sample.curvature.arg();
    let exponent = a2 * sample.phi.re;
    Contribution { branch, amplitude, phase, exponent, value: -amplitude * phase.cos(), included: true }
}

/// Saddle-point inversion at time `t` (λt units) from traced trajectories.
pub fn inversion_saddle(
    params: &ModelParams,
    t: f64,
    set: &SaddleSet,
    branches: &[BranchIndex],
    policy: Policy,
) -> Result<SaddleValue> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    if set.nu() != params.nu() {
        return Err(Error::InvalidParameter(format!(
            "trajectories were traced for nu = {}, requested nu = {}",
            set.nu(),
            params.nu()
        )));
    }
    let alpha = params.alpha();
    let tau = params.tau(t);
    let mut labels: Vec<u32> = branches.iter().map(|b| trajectory_label(*b).0).collect();
    labels.sort_unstable();
    labels.dedup();

    let mut contributions = Vec::with_capacity(labels.len());
    for n in labels {
        let branch = BranchIndex::new(n as i32);
        let c = if t == 0.0 {
            // φ = 0, f = 1 on trajectory 0; the others have |f| → ∞.
            let (v, exponent) = if n == 0 { (-1.0, 0.0) } else { (0.0, f64::NEG_INFINITY) };
            Contribution { branch, amplitude: -v, phase: 0.0, exponent, value: v, included: true }
        } else {
            let traj = set.get(n).ok_or(Error::InterpolationGap { tau })?;
            let sample = if tau < traj.tau_range().0 {
                // Below the traced grid: solve directly from the anchor.
                TrajectorySample::new(tau.sqrt(), saddle_at(branch, params.nu(), tau)?, params.nu())
            } else {
                traj.solve_at(tau)?
            };
            contribution(branch, &sample, alpha)
        };
        contributions.push(c);
    }

    match policy {
        Policy::Sum => {
            for c in &mut contributions {
                c.included = c.exponent > AMPLITUDE_CUTOFF;
            }
        }
        Policy::Max => {
            let best =
                contributions.iter().enumerate().max_by(|a, b| a.1.exponent.total_cmp(&b.1.exponent)).map(|(i, _)| i);
            for (i, c) in contributions.iter_mut().enumerate() {
                c.included = Some(i) == best;
            }
        }
    }
    let total = contributions.iter().filter(|c| c.included).map(|c| c.value).sum();
    Ok(SaddleValue { total, contributions })
}

/// Revival centres `t_n = 2πn|α|(1+ν)^{1/2}`, `n = 1..=n_max`, in λt units.
pub fn revival_times(alpha: f64, nu: f64, n_max: u32) -> Vec<f64> {
    (1..=n_max).map(|n| 2.0 * PI * n as f64 * alpha * (1.0 + nu).sqrt()).collect()
}

/// Crossing of trajectories `n` and `n+1` at resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingTime {
    pub n: u32,
    /// `4πn(n+1)/(2n+1)` in units of `t/|α|`.
    pub scaled_formula: f64,
    /// The same in λt units.
    pub formula: f64,
    /// Equality point of `Re φ_n` and `Re φ_{n+1}`, in units of `t/|α|`.
    pub scaled_refined: f64,
    pub refined: f64,
}

/// Crossing times for `n = 1..=n_max`, from the closed form and refined by
/// bisection on `Re φ_n − Re φ_{n+1}`.
pub fn crossing_times(alpha: f64, n_max: u32) -> Result<Vec<CrossingTime>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
    }
    (1..=n_max)
        .map(|n| {
            let nf = n as f64;
            let scaled_formula = 4.0 * PI * nf * (nf + 1.0) / (2.0 * nf + 1.0);
            let scaled_refined = refine_crossing(n)?;
            Ok(CrossingTime {
                n,
                scaled_formula,
                formula: alpha * scaled_formula,
                scaled_refined,
                refined: alpha * scaled_refined,
            })
        })
        .collect()
}

/// `s = t/|α|` where `Re φ_n = Re φ_{n+1}` at resonance.
pub fn refine_crossing(n: u32) -> Result<f64> {
    let re_phi = |m: u32, s: f64| -> Result<f64> {
        let f = saddle_at(BranchIndex::new(m as i32), 0.0, s * s)?;
        Ok(phi_resonant(f, s * s)?.re)
    };
    let diff = |s: f64| -> Result<f64> { Ok(re_phi(n, s)? - re_phi(n + 1, s)?) };
    let mut lo = 2.0 * PI * n as f64;
    let mut hi = 2.0 * PI * (n + 1) as f64;
    let mut dlo = diff(lo)?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let dm = diff(mid)?;
        if (dm > 0.0) == (dlo > 0.0) {
            lo = mid;
            dlo = dm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
