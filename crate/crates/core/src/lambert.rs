//! Lambert W on arbitrary branches, its Lagrange series, and the generalized
//! equation `u = w(ν + e^{2w})^{1/2}`.
//!
//! Values on branch cuts are continuous from above (counterclockwise).

use std::f64::consts::{E, PI};
use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C = Complex64;

const MAX_ITER: usize = 100;
const TWO_PI: f64 = 2.0 * PI;

/// Branch label `k` of `W_k`. With `conjugate_copy` set, the branch is used on
/// the mirrored plane: `W(u) = conj(W_k(conj u))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BranchIndex {
    pub k: i32,
    pub conjugate_copy: bool,
}

impl BranchIndex {
    pub const PRINCIPAL: BranchIndex = BranchIndex { k: 0, conjugate_copy: false };

    pub fn new(k: i32) -> Self {
        Self { k, conjugate_copy: false }
    }

    pub fn mirrored(self) -> Self {
        Self { conjugate_copy: !self.conjugate_copy, ..self }
    }
}

impl std::fmt::Display for BranchIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.conjugate_copy {
            write!(f, "{}*", self.k)
        } else {
            write!(f, "{}", self.k)
        }
    }
}

fn residual_bound(u: C) -> f64 {
    1e-12 * u.norm().max(1.0)
}

/// `W_k(u)`, the solution of `w e^w = u` on the requested branch.
pub fn lambert_w(branch: BranchIndex, u: C) -> Result<C> {
    if branch.conjugate_copy {
        lambert_w_k(branch.k, u.conj()).map(|w| w.conj())
    } else {
        lambert_w_k(branch.k, u)
    }
}

/// `W_k(u)` for a plain integer branch.
pub fn lambert_w_k(k: i32, u: C) -> Result<C> {
    if !(u.re.is_finite() && u.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("u must be finite, got {u}")));
    }
    if u == C::new(0.0, 0.0) {
        return if k == 0 { Ok(u) } else { Err(Error::Domain(format!("W_{k}(0) is unbounded"))) };
    }
    let first = halley(u, initial_guess(k, u));
    let w = match first {
        Ok(w) if on_branch(k, u, w) => w,
        _ => {
            let w = halley(u, asymptotic_guess(k, u))?;
            if !on_branch(k, u, w) {
                return Err(Error::WrongBranch(format!("iteration for W_{k}({u}) settled at {w}")));
            }
            w
        }
    };
    Ok(w)
}

/// Branch test from `w + ln w = ln u + 2πik`, skipped where that identity
/// does not distinguish branches (near `−1/e` and on the negative real axis).
fn on_branch(k: i32, u: C, w: C) -> bool {
    if (u + 1.0 / E).norm() < 1e-3 || (u.im == 0.0 && u.re < 0.0) {
        return true;
    }
    let est = ((w + w.ln()).im - u.arg()) / TWO_PI;
    est.round() as i64 == k as i64
}

fn branch_point_series(p: C) -> C {
    -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
}

fn asymptotic_guess(k: i32, u: C) -> C {
    let l1 = u.ln() + C::new(0.0, TWO_PI * k as f64);
    let l2 = l1.ln();
    l1 - l2 + l2 / l1
}

fn initial_guess(k: i32, u: C) -> C {
    let near_bp = (u + 1.0 / E).norm() < 0.3;
    let p = (2.0 * (E * u + 1.0)).sqrt();
    match k {
        0 if near_bp => branch_point_series(p),
        0 if u.norm() < 0.3 => u - u * u + 1.5 * u * u * u,
        0 if u.re > -1.0 && u.re < 1.5 && u.im.abs() < 1.0 => (1.0 + u).ln(),
        -1 if near_bp && u.im >= 0.0 => branch_point_series(-p),
        1 if near_bp && u.im < 0.0 => branch_point_series(-p),
        _ => asymptotic_guess(k, u),
    }
}

fn halley(u: C, mut w: C) -> Result<C> {
    let bound = residual_bound(u);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - u;
        if f.norm() <= 1e-3 * bound {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let dw = f / denom;
        if !(dw.re.is_finite() && dw.im.is_finite()) {
            break;
        }
        w -= dw;
        if dw.norm() <= 1e-15 * (1.0 + w.norm()) {
            break;
        }
    }
    if (w * w.exp() - u).norm() <= bound {
        Ok(w)
    } else {
        Err(Error::NoConvergence { what: format!("Halley iteration for W({u})"), last: w })
    }
}

/// Lagrange coefficient `c_n = (−n)^{n−1}/n!`.
pub fn lagrange_coefficient(n: u32) -> f64 {
    let mut c = 1.0;
    for m in 1..n {
        let mf = m as f64;
        c *= -(1.0 + 1.0 / mf).powi(m as i32 - 1);
    }
    c
}

/// Truncated series `Σ_{n=1}^{n_terms} c_n u^n` for `W_0` inside `|u| < 1/e`.
pub fn lambert_series(u: C, n_terms: u32) -> Result<C> {
    if !(u.norm() < 1.0 / E) {
        return Err(Error::Domain(format!("|u| = {} is outside the radius 1/e", u.norm())));
    }
    let mut sum = C::new(0.0, 0.0);
    let mut term = u;
    for n in 1..=n_terms {
        sum += term;
        let nf = n as f64;
        term *= -(1.0 + 1.0 / nf).powi(n as i32 - 1) * u;
    }
    Ok(sum)
}

/// Query for the generalized equation `u = w(ν + e^{2w})^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedLambertQuery {
    pub u: C,
    pub nu: f64,
    pub branch: BranchIndex,
}

/// Solution of the generalized equation. `sqrt_sign` is the sign `s` for
/// which `s·w·√(ν + e^{2w}) = u` with the principal square root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneralizedLambert {
    pub w: C,
    pub sqrt_sign: f64,
    pub residual: f64,
}

/// `(sign, residual)` of the unsquared equation at `w`.
pub fn generalized_residual(u: C, nu: f64, w: C) -> (f64, f64) {
    let v = w * (nu + (2.0 * w).exp()).sqrt();
    let plus = (v - u).norm();
    let minus = (v + u).norm();
    if plus <= minus {
        (1.0, plus)
    } else {
        (-1.0, minus)
    }
}

/// Newton on the squared relation `w²(ν + e^{2w}) = u²`.
fn newton_squared(u: C, nu: f64, mut w: C) -> Result<C> {
    let u2 = u * u;
    let bound = residual_bound(u);
    for _ in 0..MAX_ITER {
        let e2 = (2.0 * w).exp();
        let p = nu + e2;
        let g = w * w * p - u2;
        let dg = 2.0 * w * p + 2.0 * w * w * e2;
        let dw = g / dg;
        if !(dw.re.is_finite() && dw.im.is_finite()) {
            break;
        }
        w -= dw;
        if dw.norm() <= 1e-15 * (1.0 + w.norm()) {
            break;
        }
    }
    if generalized_residual(u, nu, w).1 <= bound {
        Ok(w)
    } else {
        Err(Error::NoConvergence { what: format!("Newton iteration for W({u}, {nu})"), last: w })
    }
}

/// Imaginary-part range of `W_k` widened by half a period.
fn branch_strip(k: i32) -> (f64, f64) {
    let (lo, hi) = match k {
        0 => (-PI, PI),
        k if k > 0 => (TWO_PI * (k - 1) as f64, PI * (2 * k + 1) as f64),
        k => (PI * (2 * k - 1) as f64, TWO_PI * (k + 1) as f64),
    };
    (lo - 0.5 * PI, hi + 0.5 * PI)
}

/// Solves `u = w(ν + e^{2w})^{1/2}` on the requested branch.
///
/// Without a seed the solution is continued in `ν` from `W_k(u)`, which is the
/// exact solution at `ν = 0`.
pub fn generalized_lambert(q: &GeneralizedLambertQuery, seed: Option<C>) -> Result<GeneralizedLambert> {
    let GeneralizedLambertQuery { u, nu, branch } = *q;
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu must be finite and >= 0, got {nu}")));
    }
    let flip = branch.conjugate_copy;
    let uu = if flip { u.conj() } else { u };
    let w = match seed {
        Some(s) => newton_squared(uu, nu, if flip { s.conj() } else { s })?,
        None => continue_in_nu(uu, nu, branch.k)?,
    };
    let (lo, hi) = branch_strip(branch.k);
    if w.im <= lo || w.im >= hi {
        return Err(Error::WrongBranch(format!("solution {w} lies outside the strip of branch {}", branch.k)));
    }
    let w = if flip { w.conj() } else { w };
    let (sqrt_sign, residual) = generalized_residual(u, nu, w);
    Ok(GeneralizedLambert { w, sqrt_sign, residual })
}

/// Continuation in `ln ν` from `ν₁ = min(ν, 10⁻⁶|e^{2W_k(u)}|)`, where the
/// root is still a small perturbation of `W_k(u)`.
fn continue_in_nu(u: C, nu: f64, k: i32) -> Result<C> {
    let mut w = lambert_w_k(k, u)?;
    if nu == 0.0 {
        return Ok(w);
    }
    let fail = |w: C| Error::NoConvergence { what: format!("continuation of W_{k}({u}) to nu = {nu}"), last: w };
    let start = nu.min(1e-6 * (2.0 * w.re).exp()).max(f64::MIN_POSITIVE);
    w = newton_squared(u, start, w).map_err(|_| fail(w))?;
    let (mut p, end) = (start.ln(), nu.ln());
    let mut step: f64 = 0.5;
    while p < end {
        let next = (p + step).min(end);
        let target = if next == end { nu } else { next.exp() };
        match newton_squared(u, target, w) {
            Ok(v) if (v - w).norm() < 0.5 => {
                w = v;
                p = next;
                step = (step * 1.5).min(2.0);
            }
            _ => {
                step *= 0.5;
                if step < 1e-8 {
                    return Err(fail(w));
                }
            }
        }
    }
    Ok(w)
}

/// Coefficients `c_n(ν) = (1/n)[w^{n−1}](ν + e^{2w})^{−n/2}` for `n = 1..=n_terms`.
pub fn generalized_coefficients(nu: f64, n_terms: usize) -> Vec<f64> {
    let s = 1.0 + nu;
    // (ν + e^{2w})/(1+ν) = 1 + Σ g_j w^j.
    let mut g = vec![1.0; n_terms.max(1)];
    let mut fact = 1.0;
    for (j, gj) in g.iter_mut().enumerate().skip(1) {
        fact *= 2.0 / j as f64;
        *gj = fact / s;
    }
    (1..=n_terms)
        .map(|n| {
            let a = -(n as f64) / 2.0;
            // Taylor coefficients of (1 + Σ g_j w^j)^a up to w^{n−1}.
            let mut b = vec![0.0; n];
            b[0] = 1.0;
            for m in 1..n {
                let mf = m as f64;
                b[m] = (1..=m).map(|k| ((a + 1.0) * k as f64 - mf) * g[k] * b[m - k]).sum::<f64>() / mf;
            }
            s.powf(a) * b[n - 1] / n as f64
        })
        .collect()
}

/// Lagrange series for the trajectory through the origin:
/// `Σ c_n(ν) (iτ^{1/2}/2)^n`.
pub fn generalized_series(tau: f64, nu: f64, n_terms: usize) -> Result<C> {
    if !(tau >= 0.0 && tau.is_finite() && nu >= 0.0 && nu.is_finite()) || n_terms == 0 {
        return Err(Error::InvalidParameter(format!(
            "need tau >= 0, nu >= 0 and n_terms > 0, got {tau}, {nu}, {n_terms}"
        )));
    }
    let u = C::new(0.0, 0.5 * tau.sqrt());
    let c = generalized_coefficients(nu, n_terms);
    let mut sum = C::new(0.0, 0.0);
    let mut pow = u;
    let mut mags = Vec::with_capacity(n_terms);
    for cn in &c {
        let term = *cn * pow;
        mags.push(term.norm());
        sum += term;
        pow *= u;
    }
    if n_terms >= 8 && tau > 0.0 {
        // Ratio test over the tail, corrected for a square-root singularity.
        let m = mags.len();
        let (a, b) = (mags[m - 5], mags[m - 1]);
        if a > 0.0 && b > 1e-17 * sum.norm() {
            let ratio = (b / a).powf(0.25) * (1.0 + 1.5 / m as f64);
            if ratio >= 1.0 {
                return Err(Error::Domain(format!(
                    "series diverges at tau = {tau}, nu = {nu} (term ratio {ratio:.3})"
                )));
            }
        }
    }
    Ok(sum)
}

/// Critical detuning `ν₀ = 1/(2e³)`; above it the branch point leaves the real
/// axis.
pub fn critical_detuning() -> f64 {
    0.5 * (-3.0f64).exp()
}

/// Branch point `w₀(ν)` solving `ν + e^{2w}(1 + w) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPointW0 {
    pub w0: C,
    /// Raw series value, when the series was used.
    pub series: Option<f64>,
    /// `ν` exceeds the critical detuning.
    pub supercritical: bool,
    pub residual: f64,
}

pub fn branch_point_residual(nu: f64, w: C) -> f64 {
    (nu + (2.0 * w).exp() * (1.0 + w)).norm()
}

/// `w₀ = −1 − ½ Σ n^{n−1}/n! (2e²ν)^n`, polished by Newton on
/// `ν + e^{2w}(1 + w)`. Falls back to root-finding outside the series radius.
pub fn branch_point_w0(nu: f64, n_terms: u32) -> Result<BranchPointW0> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu must be finite and >= 0, got {nu}")));
    }
    let nu0 = critical_detuning();
    let x = 2.0 * E * E * nu;
    let (seed, series) = if x < 1.0 / E && nu < nu0 {
        // n^{n−1}/n! x^n by ratio: t_{n+1}/t_n = (1+1/n)^{n−1} x.
        let mut sum = 0.0;
        let mut term = x;
        for n in 1..=n_terms {
            sum += term;
            let nf = n as f64;
            term *= (1.0 + 1.0 / nf).powi(n as i32 - 1) * x;
        }
        let s = -1.0 - 0.5 * sum;
        (C::new(s, 0.0), Some(s))
    } else {
        // Complex pair above ν₀; take the member with positive imaginary part.
        let d = (nu - nu0).max(0.0).sqrt();
        (C::new(-1.5, 2.0 * d.max(1e-3)), None)
    };
    let mut w = seed;
    for _ in 0..MAX_ITER {
        let e2 = (2.0 * w).exp();
        let h = nu + e2 * (1.0 + w);
        let dh = e2 * (3.0 + 2.0 * w);
        let dw = h / dh;
        if !(dw.re.is_finite() && dw.im.is_finite()) {
            break;
        }
        w -= dw;
        if dw.norm() < 1e-16 * (1.0 + w.norm()) {
            break;
        }
    }
    let residual = branch_point_residual(nu, w);
    if !(residual < 1e-12) {
        return Err(Error::NoConvergence { what: format!("branch point for nu = {nu}"), last: w });
    }
    Ok(BranchPointW0 { w0: w, series, supercritical: nu > nu0, residual })
}

/// Zeros of `ν + e^{2w}`: `½ ln ν + iπ(n + ½)`.
pub fn branch_points_generalized(nu: f64, n_range: RangeInclusive<i32>) -> Result<Vec<C>> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Domain(format!("branch points exist only for finite nu > 0, got {nu}")));
    }
    let re = 0.5 * nu.ln();
    Ok(n_range.map(|n| C::new(re, PI * (n as f64 + 0.5))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn special_values() {
        assert_eq!(lambert_w(BranchIndex::PRINCIPAL, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!((lambert_w_k(0, c(E, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        assert!((lambert_w_k(0, c(-1.0 / E, 0.0)).unwrap() + 1.0).norm() < 1e-6);
        assert!((lambert_w_k(-1, c(-1.0 / E, 0.0)).unwrap() + 1.0).norm() < 1e-6);
        assert!(matches!(lambert_w_k(2, c(0.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn multi_branch_golden_values() {
        let cases = [
            (0, c(1.0, 0.0), c(0.567_143_290_409_783_8, 0.0)),
            (0, c(0.0, PI / 2.0), c(0.566_417_330_285_464_4, 0.688_453_227_107_702_1)),
            (1, c(2.0, 3.0), c(-0.446_271_712_128_574_8, 5.615_883_357_759_838)),
            (-1, c(-0.2, 0.1), c(-2.435_695_170_461_1, -0.769_740_675_447_562_9)),
            (-3, c(0.5, -7.0), c(-0.982_823_630_252_201_1, -18.725_811_601_808_843)),
            (5, c(-100.0, 0.5), c(1.107_650_334_902_561_5, 33.015_259_972_782_87)),
            (2, c(0.0, 1.5), c(-2.126_448_129_437_541, 12.396_487_649_640_898)),
            (1, c(0.0, -1.5), c(-0.689_621_159_964_555_9, 2.908_810_332_534_587)),
        ];
        for (k, u, w) in cases {
            let got = lambert_w_k(k, u).unwrap();
            assert!((got - w).norm() < 1e-13, "W_{k}({u}) = {got}, expected {w}");
        }
    }

    #[test]
    fn cut_side_from_above() {
        // Real W_{-1} on (-1/e, 0) and complex W_0 on (-inf, -1/e) with Im > 0.
        let w = lambert_w_k(-1, c(-0.2, 0.0)).unwrap();
        assert!(w.im.abs() < 1e-14 && w.re < -1.0);
        let w = lambert_w_k(0, c(-1.0, 0.0)).unwrap();
        assert!(w.im > 0.0);
    }

    #[test]
    fn conjugate_copy_mirrors() {
        let u = c(0.3, 1.7);
        let b = BranchIndex::new(2);
        let w = lambert_w(b.mirrored(), u).unwrap();
        assert_eq!(w, lambert_w(b, u.conj()).unwrap().conj());
        assert!((w - lambert_w_k(-2, u).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn lagrange_coefficients() {
        assert_eq!(lagrange_coefficient(1), 1.0);
        assert_eq!(lagrange_coefficient(2), -1.0);
        assert_eq!(lagrange_coefficient(3), 1.5);
        assert_abs_diff_eq!(lagrange_coefficient(4), -16.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn series_matches_iteration() {
        for u in [c(0.1, 0.0), c(0.0, 0.05)] {
            let s = lambert_series(u, 30).unwrap();
            assert!((s - lambert_w_k(0, u).unwrap()).norm() < 1e-12);
        }
        assert!(lambert_series(c(0.4, 0.0), 10).is_err());
    }

    #[test]
    fn generalized_coefficients_low_order() {
        for nu in [0.0, 0.2, 1.0] {
            let cs = generalized_coefficients(nu, 3);
            assert_abs_diff_eq!(cs[0], (1.0 + nu).powf(-0.5), epsilon = 1e-15);
            assert_abs_diff_eq!(cs[1], -(1.0 + nu).powi(-2), epsilon = 1e-15);
        }
        let cs = generalized_coefficients(0.0, 12);
        for (n, cn) in cs.iter().enumerate() {
            let expect = lagrange_coefficient(n as u32 + 1);
            assert_abs_diff_eq!(*cn, expect, epsilon = 1e-12 * expect.abs());
        }
    }

    #[test]
    fn generalized_series_at_resonance() {
        let tau = 1e-4;
        let s = generalized_series(tau, 0.0, 20).unwrap();
        let l = lambert_series(c(0.0, 0.5 * tau.sqrt()), 20).unwrap();
        assert!((s - l).norm() < 1e-15);
        assert!(generalized_series(1.0, 0.0, 30).is_err());
    }

    #[test]
    fn generalized_revival_points() {
        for nu in [0.0f64, 0.2, 1.5] {
            for n in 1..=3 {
                let u = c(0.0, PI * n as f64 * (1.0 + nu).sqrt());
                let q = GeneralizedLambertQuery { u, nu, branch: BranchIndex::new((n + 1) / 2) };
                let sol = generalized_lambert(&q, Some(c(0.1, PI * n as f64 + 0.1))).unwrap();
                assert!((sol.w - c(0.0, PI * n as f64)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn generalized_residual_small() {
        let q = GeneralizedLambertQuery { u: c(0.0, 0.3), nu: 0.2, branch: BranchIndex::PRINCIPAL };
        let sol = generalized_lambert(&q, None).unwrap();
        assert!(sol.residual < 1e-12);
        let q0 = GeneralizedLambertQuery { nu: 0.0, ..q };
        let w0 = generalized_lambert(&q0, None).unwrap().w;
        assert!((w0 * w0.exp() - q.u).norm() < 1e-12);
    }

    #[test]
    fn branch_point_values() {
        assert_eq!(branch_point_w0(0.0, 30).unwrap().w0, c(-1.0, 0.0));
        let b = branch_point_w0(0.01, 30).unwrap();
        assert!(b.residual < 1e-12 && !b.supercritical);
        assert!(branch_point_w0(0.03, 30).unwrap().supercritical);
        assert_abs_diff_eq!(critical_detuning(), 0.024_893_534_183_931_97, epsilon = 1e-17);
    }

    #[test]
    fn generalized_branch_points() {
        let p = branch_points_generalized(1.0, 0..=0).unwrap();
        assert_abs_diff_eq!(p[0].re, 0.0);
        assert_abs_diff_eq!(p[0].im, PI / 2.0, epsilon = 1e-15);
        let p = branch_points_generalized(0.2, 0..=0).unwrap();
        assert_abs_diff_eq!(p[0].re, -0.804_718_956_217_050_2, epsilon = 1e-15);
        let p = branch_points_generalized(E * E, -1..=-1).unwrap();
        assert!((p[0] - c(1.0, -PI / 2.0)).norm() < 1e-15);
        assert!(branch_points_generalized(0.0, 0..=1).is_err());
    }
}
