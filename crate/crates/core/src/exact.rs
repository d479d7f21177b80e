//! Direct summation of the Jaynes-Cummings series.
//!
//! For an atom starting in the ground state and a field with photon-number
//! distribution `W_n`, the inversion is
//!
//! ```text
//! <σ3(t)> = −Σ_n W_n (μ + n cos(2√(μ+n) t)) / (μ + n)
//! ```
//!
//! with `t` measured in units of `1/λ` and `μ = Δ²/4λ²`. The `n = 0` summand at
//! `μ = 0` is taken as `−W_0`, its value in the resonant form of the sum.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Default bound on the discarded Poisson tail mass.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-14;

/// Largest supported `|α|²`. Beyond this `e^{−|α|²}` underflows.
pub const MAX_ALPHA_SQUARED: f64 = 700.0;

/// Photon-number probabilities `W_0 ..= W_{N_max}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    weights: Vec<f64>,
    mean: f64,
}

impl PhotonDistribution {
    /// Vacuum field: `W_0 = 1`.
    pub fn vacuum() -> Self {
        Self { weights: vec![1.0], mean: 0.0 }
    }

    /// Coherent state of amplitude `|α|`, truncated at the smallest `N_max`
    /// whose discarded tail is below `tail_tolerance`.
    pub fn poisson(alpha: f64, tail_tolerance: f64) -> Result<Self> {
        make_poisson(alpha, tail_tolerance)
    }

    /// Arbitrary distribution. Weights must be finite, non-negative and sum to
    /// one within `1e-12`.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("empty weight vector".into()));
        }
        if let Some((n, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidParameter(format!("weight W_{n} = {w} is not a probability")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, expected 1")));
        }
        let mean = weights.iter().enumerate().map(|(n, w)| n as f64 * w).sum();
        Ok(Self { weights, mean })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mean photon number of the retained weights.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Largest retained photon number.
    pub fn truncation_index(&self) -> usize {
        self.weights.len() - 1
    }

    /// Retained probability mass.
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `G(s) = Σ W_n s^n`.
    pub fn generating_function(&self, s: Complex64) -> Complex64 {
        self.weights.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &w| acc * s + w)
    }
}

/// Poisson weights `W_n = |α|^{2n} e^{−|α|²}/n!` by forward recursion.
pub fn make_poisson(alpha: f64, tail_tolerance: f64) -> Result<PhotonDistribution> {
    ensure_finite("alpha", alpha)?;
    if alpha < 0.0 {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    if !(tail_tolerance > 0.0 && tail_tolerance < 1.0) {
        return Err(Error::InvalidParameter(format!("tail tolerance must lie in (0, 1), got {tail_tolerance}")));
    }
    let a2 = alpha * alpha;
    if a2 > MAX_ALPHA_SQUARED {
        return Err(Error::InvalidParameter(format!(
            "|alpha|^2 = {a2} exceeds the supported maximum {MAX_ALPHA_SQUARED}"
        )));
    }
    if a2 == 0.0 {
        return Ok(PhotonDistribution::vacuum());
    }

    // Run past the mode until the geometric bound on everything beyond the
    // last computed weight is negligible next to the tolerance.
    let mut weights = vec![(-a2).exp()];
    let far_bound = loop {
        let n = weights.len() - 1;
        let w = weights[n];
        let ratio = a2 / (n as f64 + 2.0);
        if ratio < 0.5 {
            let bound = w * ratio / (1.0 - ratio);
            if bound < tail_tolerance * 1e-6 {
                break bound;
            }
        }
        weights.push(w * a2 / (n as f64 + 1.0));
    };

    // tail[N] = mass strictly beyond N.
    let mut tail = far_bound;
    let mut n_max = weights.len() - 1;
    for n in (0..weights.len()).rev() {
        if tail >= tail_tolerance {
            break;
        }
        n_max = n;
        tail += weights[n];
    }
    weights.truncate(n_max + 1);
    let mean = weights.iter().enumerate().map(|(n, w)| n as f64 * w).sum();
    Ok(PhotonDistribution { weights, mean })
}

/// Reporting unit for time values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
pub enum TimeUnit {
    /// Dimensionless `λt`.
    #[default]
    #[serde(rename = "lambda-t")]
    #[value(name = "lambda-t")]
    LambdaT,
    /// `t/|α|`.
    #[serde(rename = "t-over-alpha")]
    #[value(name = "t-over-alpha")]
    TOverAlpha,
    /// `t/T` with the revival period `T = 2π|α|(1+ν)^{1/2}`.
    #[serde(rename = "t-over-T")]
    #[value(name = "t-over-T")]
    TOverT,
}

impl TimeUnit {
    pub fn name(self) -> &'static str {
        match self {
            TimeUnit::LambdaT => "lambda-t",
            TimeUnit::TOverAlpha => "t-over-alpha",
            TimeUnit::TOverT => "t-over-T",
        }
    }
}

/// Coherent amplitude and detuning. `ν·|α|² = μ` is kept consistent by the
/// constructors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    alpha: f64,
    mu: f64,
    nu: f64,
    time_unit: TimeUnit,
}

impl ModelParams {
    pub fn resonant(alpha: f64) -> Result<Self> {
        Self::from_mu(alpha, 0.0)
    }

    /// From the absolute detuning `μ = Δ²/4λ²`.
    pub fn from_mu(alpha: f64, mu: f64) -> Result<Self> {
        check_alpha_mu(alpha, mu, "mu")?;
        let nu = if mu == 0.0 {
            0.0
        } else if alpha == 0.0 {
            return Err(Error::InvalidParameter("nu is undefined for alpha = 0 and mu > 0".into()));
        } else {
            mu / (alpha * alpha)
        };
        Ok(Self { alpha, mu, nu, time_unit: TimeUnit::LambdaT })
    }

    /// From the relative detuning `ν = μ/|α|²`.
    pub fn from_nu(alpha: f64, nu: f64) -> Result<Self> {
        check_alpha_mu(alpha, nu, "nu")?;
        Ok(Self { alpha, mu: nu * alpha * alpha, nu, time_unit: TimeUnit::LambdaT })
    }

    pub fn with_time_unit(mut self, unit: TimeUnit) -> Self {
        self.time_unit = unit;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn time_unit(&self) -> TimeUnit {
        self.time_unit
    }

    pub fn is_resonant(&self) -> bool {
        self.mu == 0.0
    }

    /// `T = 2π|α|(1+ν)^{1/2}` in `λt` units.
    pub fn revival_period(&self) -> f64 {
        2.0 * PI * self.alpha * (1.0 + self.nu).sqrt()
    }

    /// Scale factor `s` with `λt = s · value` for the given unit.
    pub fn unit_scale(&self, unit: TimeUnit) -> f64 {
        match unit {
            TimeUnit::LambdaT => 1.0,
            TimeUnit::TOverAlpha => self.alpha,
            TimeUnit::TOverT => self.revival_period(),
        }
    }

    pub fn to_lambda_t(&self, value: f64, unit: TimeUnit) -> f64 {
        value * self.unit_scale(unit)
    }

    pub fn from_lambda_t(&self, t: f64, unit: TimeUnit) -> f64 {
        t / self.unit_scale(unit)
    }

    /// `τ = t²/|α|²`.
    pub fn tau(&self, t: f64) -> f64 {
        let s = t / self.alpha;
        s * s
    }
}

fn check_alpha_mu(alpha: f64, x: f64, name: &str) -> Result<()> {
    ensure_finite("alpha", alpha)?;
    ensure_finite(name, x)?;
    if alpha < 0.0 {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    if x < 0.0 {
        return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {x}")));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    ensure_finite("t", t)?;
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    Ok(())
}

/// Full inversion with detuning `μ = params.mu()`.
pub fn inversion_exact(dist: &PhotonDistribution, params: &ModelParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let mu = params.mu();
    let sum: f64 = dist
        .weights()
        .iter()
        .enumerate()
        .rev()
        .map(|(n, &w)| {
            let m = mu + n as f64;
            if m == 0.0 {
                w
            } else {
                w * (mu + n as f64 * (2.0 * m.sqrt() * t).cos()) / m
            }
        })
        .sum();
    Ok(-sum)
}

/// Resonant inversion `−Σ W_n cos(2√n t)`.
pub fn inversion_exact_resonant(dist: &PhotonDistribution, t: f64) -> Result<f64> {
    check_time(t)?;
    let sum: f64 = dist.weights().iter().enumerate().rev().map(|(n, &w)| w * (2.0 * (n as f64).sqrt() * t).cos()).sum();
    Ok(-sum)
}

/// Time-independent part `−Σ W_n μ/(μ+n)` for the given distribution.
///
/// At `μ = 0` this is exactly zero; the `n = 0` summand then belongs to
/// [`time_dependent_part`].
pub fn static_part_of(dist: &PhotonDistribution, mu: f64) -> Result<f64> {
    ensure_finite("mu", mu)?;
    if mu < 0.0 {
        return Err(Error::InvalidParameter(format!("mu must be >= 0, got {mu}")));
    }
    if mu == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = dist.weights().iter().enumerate().rev().map(|(n, &w)| w * mu / (mu + n as f64)).sum();
    Ok(-sum)
}

/// Oscillating remainder `−Σ W_n n cos(2√(μ+n) t)/(μ+n)`.
pub fn time_dependent_part(dist: &PhotonDistribution, mu: f64, t: f64) -> Result<f64> {
    ensure_finite("mu", mu)?;
    check_time(t)?;
    let sum: f64 = dist
        .weights()
        .iter()
        .enumerate()
        .rev()
        .map(|(n, &w)| {
            let m = mu + n as f64;
            if m == 0.0 {
                w
            } else {
                w * n as f64 * (2.0 * m.sqrt() * t).cos() / m
            }
        })
        .sum();
    Ok(-sum)
}

/// Time-independent part for a coherent state of amplitude `|α|`.
pub fn static_part(alpha: f64, mu: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
    }
    let dist = make_poisson(alpha, DEFAULT_TAIL_TOLERANCE)?;
    static_part_of(&dist, mu)
}

/// Large-`|α|` estimate `−ν` of [`static_part`].
pub fn static_part_estimate(alpha: f64, mu: f64) -> f64 {
    -mu / (alpha * alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vacuum_inversion_is_minus_one() {
        let d = PhotonDistribution::vacuum();
        for t in [0.0, 0.3, 7.0, 1e3] {
            assert_eq!(inversion_exact_resonant(&d, t).unwrap(), -1.0);
        }
    }

    #[test]
    fn single_photon_is_pure_cosine() {
        let d = PhotonDistribution::from_weights(vec![0.0, 1.0]).unwrap();
        let p = ModelParams::resonant(1.0).unwrap();
        for t in [0.0, 0.4, 2.5, 11.0] {
            assert_abs_diff_eq!(inversion_exact(&d, &p, t).unwrap(), -(2.0 * t).cos(), epsilon = 1e-15);
        }
    }

    #[test]
    fn poisson_mean_and_cutoff() {
        let d = make_poisson(5.0, 1e-14).unwrap();
        assert_abs_diff_eq!(d.mean(), 25.0, epsilon = 1e-10);
        assert!(d.truncation_index() >= 50);
        assert!(d.total() >= 1.0 - 1e-14);
        assert_eq!(make_poisson(0.0, 1e-14).unwrap(), PhotonDistribution::vacuum());
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(make_poisson(f64::NAN, 1e-14).is_err());
        assert!(make_poisson(-1.0, 1e-14).is_err());
        assert!(make_poisson(1.0, 0.0).is_err());
        assert!(make_poisson(30.0, 1e-14).is_err());
        assert!(ModelParams::from_mu(0.0, 1.0).is_err());
        assert!(PhotonDistribution::from_weights(vec![0.5, 0.4]).is_err());
        let d = PhotonDistribution::vacuum();
        assert!(inversion_exact_resonant(&d, -1.0).is_err());
    }

    #[test]
    fn params_keep_nu_consistent() {
        let p = ModelParams::from_mu(5.0, 5.0).unwrap();
        assert_abs_diff_eq!(p.nu() * 25.0, 5.0, epsilon = 1e-12);
        let q = ModelParams::from_nu(5.0, 0.2).unwrap();
        assert_abs_diff_eq!(q.mu(), 5.0, epsilon = 1e-12);
        assert!(ModelParams::resonant(3.0).unwrap().is_resonant());
    }

    #[test]
    fn generating_function_at_one_is_total() {
        let d = make_poisson(2.0, 1e-14).unwrap();
        let g = d.generating_function(Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(g.re, d.total(), epsilon = 1e-15);
        // Coherent state: G(s) = exp(|α|²(s − 1)).
        let s = Complex64::new(0.3, 0.4);
        let expect = (4.0 * (s - 1.0)).exp();
        assert!((d.generating_function(s) - expect).norm() < 1e-13);
    }
}
