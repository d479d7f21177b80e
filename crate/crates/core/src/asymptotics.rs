//! Closed-form collapse and revival envelopes.
//!
//! These are the saddle contributions expanded to second order around
//! `t = 0` (collapse) and around the revival centres `t_n`.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether the revival formula keeps the `(t − t_n)²` correction in the phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RevivalMode {
    #[default]
    Full,
    Simplified,
}

/// `−prefactor · exp(−(t − center)²/2width²) · cos(c₀ + c₁t + c₂t²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeDescriptor {
    pub center_time: f64,
    pub width: f64,
    pub prefactor: f64,
    pub phase_coefficients: (f64, f64, f64),
}

impl EnvelopeDescriptor {
    pub fn envelope(&self, t: f64) -> f64 {
        let x = (t - self.center_time) / self.width;
        self.prefactor * (-0.5 * x * x).exp()
    }

    pub fn phase(&self, t: f64) -> f64 {
        let (c0, c1, c2) = self.phase_coefficients;
        c0 + t * (c1 + t * c2)
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        -self.envelope(t) * self.phase(t).cos()
    }
}

/// `−e^{−t²/2} cos(2|α|t)`.
pub fn collapse_resonant(alpha: f64, t: f64) -> f64 {
    -(-0.5 * t * t).exp() * (2.0 * alpha * t).cos()
}

/// `−e^{−t²/2(1+ν)} cos(2|α|t(1+ν)^{1/2})`.
pub fn collapse_detuned(alpha: f64, nu: f64, t: f64) -> f64 {
    let s = 1.0 + nu;
    -(-0.5 * t * t / s).exp() * (2.0 * alpha * t * s.sqrt()).cos()
}

pub fn collapse_descriptor(alpha: f64, nu: f64) -> EnvelopeDescriptor {
    let s = 1.0 + nu;
    EnvelopeDescriptor {
        center_time: 0.0,
        width: s.sqrt(),
        prefactor: 1.0,
        phase_coefficients: (0.0, 2.0 * alpha * s.sqrt(), 0.0),
    }
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("revival index must be >= 1".into()));
    }
    Ok(())
}

/// Resonant revival `n` around `t_n = 2πn|α|`:
///
/// ```text
/// −(1+π²n²)^{−1/4} exp(−(t−t_n)²/2(1+π²n²))
///     · cos(t²/2πn − (t−t_n)²/(2πn(1+π²n²)) − π/4)
/// ```
///
/// The simplified mode drops the `(t − t_n)²` term in the cosine.
pub fn revival_resonant(alpha: f64, n: u32, t: f64, mode: RevivalMode) -> Result<f64> {
    check_n(n)?;
    let nf = n as f64;
    let q = 1.0 + PI * PI * nf * nf;
    let tn = 2.0 * PI * nf * alpha;
    let d2 = (t - tn) * (t - tn);
    let mut phase = t * t / (2.0 * PI * nf) - FRAC_PI_4;
    if mode == RevivalMode::Full {
        phase -= d2 / (2.0 * PI * nf * q);
    }
    Ok(-q.powf(-0.25) * (-0.5 * d2 / q).exp() * phase.cos())
}

pub fn revival_resonant_descriptor(alpha: f64, n: u32, mode: RevivalMode) -> Result<EnvelopeDescriptor> {
    check_n(n)?;
    let nf = n as f64;
    let q = 1.0 + PI * PI * nf * nf;
    let tn = 2.0 * PI * nf * alpha;
    let a = 1.0 / (2.0 * PI * nf);
    let phase_coefficients = match mode {
        RevivalMode::Simplified => (-FRAC_PI_4, 0.0, a),
        RevivalMode::Full => {
            let b = a / q;
            (-FRAC_PI_4 - b * tn * tn, 2.0 * b * tn, a - b)
        }
    };
    Ok(EnvelopeDescriptor { center_time: tn, width: q.sqrt(), prefactor: q.powf(-0.25), phase_coefficients })
}

/// Detuned revival `n` around `t_n = 2πn|α|(1+ν)^{1/2}`, with
///
/// ```text
/// |α|² Re φ_ν = −½ (1+ν)/(π²n² + (1+ν)²) (t − t_n)²
/// |α|² Im φ_ν ≈ 2πnμ + t²/2πn
/// |f_ν|       = (1 + π²n²/(1+ν)²)^{1/2},   arg f_ν ≈ π/2.
/// ```
///
/// The constant `2πnμ` is reduced modulo `2π`.
pub fn revival_detuned(alpha: f64, nu: f64, n: u32, t: f64) -> Result<f64> {
    let d = revival_detuned_descriptor(alpha, nu, n)?;
    let s = 1.0 + nu;
    let nf = n as f64;
    let tn = d.center_time;
    let re = -0.5 * s / (PI * PI * nf * nf + s * s) * (t - tn) * (t - tn);
    let phase = d.phase_coefficients.0 + t * t / (2.0 * PI * nf);
    Ok(-d.prefactor * re.exp() * phase.cos())
}

pub fn revival_detuned_descriptor(alpha: f64, nu: f64, n: u32) -> Result<EnvelopeDescriptor> {
    check_n(n)?;
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu must be finite and >= 0, got {nu}")));
    }
    let s = 1.0 + nu;
    let nf = n as f64;
    let mu = nu * alpha * alpha;
    let f_abs = (1.0 + PI * PI * nf * nf / (s * s)).sqrt();
    let constant = 2.0 * PI * (nf * mu).rem_euclid(1.0) - FRAC_PI_4;
    Ok(EnvelopeDescriptor {
        center_time: 2.0 * PI * nf * alpha * s.sqrt(),
        width: ((PI * PI * nf * nf + s * s) / s).sqrt(),
        prefactor: f_abs.powf(-0.5),
        phase_coefficients: (constant, 0.0, 1.0 / (2.0 * PI * nf)),
    })
}
