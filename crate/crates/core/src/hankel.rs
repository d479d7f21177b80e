//! Hankel-contour quadrature for the inversion.
//!
//! The cosine has the loop representation
//!
//! ```text
//! cos x = (1/(2√π i)) ∮ z^{−1/2} exp(z − x²/4z) dz
//! ```
//!
//! around the cut `(−∞, 0]`. Summing it against Poisson weights gives
//!
//! ```text
//! <σ3> = −(t/(2√π i)) ∮ z^{−1/2} exp(|α|² Φ(z, ν)) dz,
//! Φ(z, ν) = τz − ν/z + e^{−1/z} − 1,   τ = t²/|α|².
//! ```
//!
//! At `ν = 0` this is the exact resonant sum. For `ν > 0` it equals
//! `−Σ W_n cos(2√(μ+n) t)`, which drops the `n/(μ+n)` amplitude factors and the
//! static part of the exact sum.
//!
//! Paths are laid out in the saddle variable `F = −1/(2z)`. The lower half runs
//! along a ray `F = s e^{−iβ}` out of the origin, a small arc to the negative
//! imaginary axis, down that axis to `−iY`, left to `−X − iY` and along a large
//! arc to the negative real axis. The upper half is the mirror image, so every
//! node has a conjugate partner. In `z` this is a loop coming in from `−∞`
//! below the cut, crossing the positive real axis and returning above it.
//!
//! The `n = 0` photon term `e^{|α|²(τz − ν/z − 1)}` is subtracted from the
//! integrand and added back in closed form, which removes the slowly decaying
//! part of the integrand along the far arc.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::exact::ModelParams;
use crate::quadrature::GaussLegendre;

type C = Complex64;

/// Bound on the imaginary residual of conjugate-symmetric quadratures.
pub const IMAG_RESIDUAL_BOUND: f64 = 1e-8;

const CHUNK: usize = 4096;

/// `Φ(z, ν) = τz − ν/z + e^{−1/z} − 1` and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseFunction {
    pub tau: f64,
    pub nu: f64,
}

impl PhaseFunction {
    pub fn new(tau: f64, nu: f64) -> Result<Self> {
        ensure_finite("tau", tau)?;
        ensure_finite("nu", nu)?;
        if tau < 0.0 || nu < 0.0 {
            return Err(Error::InvalidParameter(format!("tau and nu must be >= 0, got tau = {tau}, nu = {nu}")));
        }
        Ok(Self { tau, nu })
    }

    fn check(z: C) -> Result<C> {
        if z == C::new(0.0, 0.0) {
            return Err(Error::Domain("phase function is singular at z = 0".into()));
        }
        Ok(z.inv())
    }

    pub fn value(&self, z: C) -> Result<C> {
        let w = Self::check(z)?;
        let mut v = self.tau * z + (-w).exp() - 1.0;
        if self.nu != 0.0 {
            v -= self.nu * w;
        }
        Ok(v)
    }

    pub fn derivative(&self, z: C) -> Result<C> {
        let w = Self::check(z)?;
        Ok(self.tau + (self.nu + (-w).exp()) * w * w)
    }

    pub fn second_derivative(&self, z: C) -> Result<C> {
        let w = Self::check(z)?;
        let w3 = w * w * w;
        Ok(-2.0 * self.nu * w3 + (-w).exp() * (w3 * w - 2.0 * w3))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece {
    /// `F = origin + p·dir`, `|dir| = 1`.
    Line { origin: C, dir: C },
    /// `F = radius·e^{ip}`.
    Arc { radius: f64 },
}

impl Piece {
    fn point(&self, p: f64) -> C {
        match *self {
            Piece::Line { origin, dir } => origin + dir * p,
            Piece::Arc { radius } => C::from_polar(radius, p),
        }
    }

    fn tangent(&self, p: f64) -> C {
        match *self {
            Piece::Line { dir, .. } => dir,
            Piece::Arc { radius } => C::new(0.0, 1.0) * C::from_polar(radius, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Panel {
    piece: Piece,
    a: f64,
    b: f64,
}

/// Quadrature node in the `z`-plane: integration point and weight `dz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathNode {
    pub z: C,
    pub weight: C,
}

/// Tuning knobs for [`build_path`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathOptions {
    /// Upper bound on the radius of the small arc around `F = 0`.
    pub inner_radius_cap: f64,
    /// Angle `β` of the ray `F = s e^{−iβ}`; the `z`-plane arm makes this
    /// angle with the negative real axis.
    pub ray_angle: f64,
    /// Largest `|x|` that [`cos_via_hankel`] must resolve on this path.
    pub cosine_bound: f64,
    /// Panels per unit of local phase, relative to the default layout.
    pub density: f64,
    /// Largest accepted quadrature error estimate.
    pub tolerance: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self { inner_radius_cap: 0.25, ray_angle: FRAC_PI_4, cosine_bound: 10.0, density: 0.25, tolerance: 1e-8 }
    }
}

/// Geometry of a path in the `F`-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathGeometry {
    pub alpha: f64,
    pub tau: f64,
    pub nu: f64,
    /// Radius `ρ` of the small `F`-plane arc.
    pub inner_radius: f64,
    /// Start of the ray, `F = s_min e^{−iβ}`.
    pub ray_start: f64,
    pub ray_angle: f64,
    /// Depth `Y` of the horizontal leg `Im F = −Y`.
    pub depth: f64,
    /// Extent `X` of the horizontal leg.
    pub extent: f64,
    pub cosine_bound: f64,
}

/// Conjugation-symmetric quadrature path around the cut `(−∞, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelPath {
    panels: Vec<Panel>,
    nodes: Vec<PathNode>,
    geometry: PathGeometry,
    tolerance: f64,
}

impl HankelPath {
    fn from_panels(panels: Vec<Panel>, geometry: PathGeometry, tolerance: f64) -> Self {
        let rule = GaussLegendre::panel();
        let mut lower = Vec::with_capacity(panels.len() * rule.len());
        for p in &panels {
            let h = 0.5 * (p.b - p.a);
            let c = 0.5 * (p.a + p.b);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let s = c + h * x;
                let f = p.piece.point(s);
                let df = p.piece.tangent(s) * (h * w);
                lower.push(PathNode { z: -0.5 / f, weight: df / (2.0 * f * f) });
            }
        }
        let mut nodes = lower.clone();
        nodes.extend(lower.iter().rev().map(|n| PathNode { z: n.z.conj(), weight: -n.weight.conj() }));
        Self { panels, nodes, geometry, tolerance }
    }

    pub fn nodes(&self) -> &[PathNode] {
        &self.nodes
    }

    pub fn geometry(&self) -> &PathGeometry {
        &self.geometry
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `z`-plane radius of the loop around the origin, `1/(2ρ)`.
    pub fn radius(&self) -> f64 {
        0.5 / self.geometry.inner_radius
    }

    /// `z`-plane length of each arm toward `−∞`.
    pub fn arm_length(&self) -> f64 {
        0.5 / self.geometry.ray_start - 0.5 / self.geometry.inner_radius
    }

    /// Angle of the arms measured from the negative real axis.
    pub fn arm_angle(&self) -> f64 {
        self.geometry.ray_angle
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    /// Same path with every panel split in two.
    pub fn refined(&self) -> Self {
        let panels = self
            .panels
            .iter()
            .flat_map(|p| {
                let m = 0.5 * (p.a + p.b);
                [Panel { b: m, ..*p }, Panel { a: m, ..*p }]
            })
            .collect();
        Self::from_panels(panels, self.geometry, self.tolerance)
    }

    /// Same path with adjacent panels of each piece merged pairwise.
    pub fn coarsened(&self) -> Self {
        let mut panels = Vec::with_capacity(self.panels.len() / 2 + 1);
        let mut i = 0;
        while i < self.panels.len() {
            let p = self.panels[i];
            match self.panels.get(i + 1) {
                Some(q) if q.piece == p.piece && q.a == p.b => {
                    panels.push(Panel { b: q.b, ..p });
                    i += 2;
                }
                _ => {
                    panels.push(p);
                    i += 1;
                }
            }
        }
        Self::from_panels(panels, self.geometry, self.tolerance)
    }

    /// Checks the structural invariants: nodes off the cut, conjugate pairing
    /// and a positive loop radius.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidPath(format!("node count {n} is not a positive even number")));
        }
        if !(self.geometry.inner_radius > 0.0) {
            return Err(Error::InvalidPath("loop radius must be positive".into()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            let z = node.z;
            if !(z.re.is_finite() && z.im.is_finite() && node.weight.norm().is_finite()) {
                return Err(Error::InvalidPath(format!("node {i} is not finite")));
            }
            if z.im == 0.0 && z.re <= 0.0 {
                return Err(Error::InvalidPath(format!("node {i} = {z} lies on the cut")));
            }
            let m = self.nodes[n - 1 - i];
            if m.z != z.conj() || m.weight != -node.weight.conj() {
                return Err(Error::InvalidPath(format!("node {i} has no conjugate partner")));
            }
        }
        Ok(())
    }
}

/// Path for the resonant integrand at `(α, τ)` with default options.
pub fn build_default_path(alpha: f64, tau: f64) -> Result<HankelPath> {
    build_path(alpha, tau, 0.0, &PathOptions::default())
}

/// Path for the integrand with phase `Φ(z, ν)` at `(α, τ)`.
pub fn build_path(alpha: f64, tau: f64, nu: f64, opts: &PathOptions) -> Result<HankelPath> {
    for (name, v) in [("alpha", alpha), ("tau", tau), ("nu", nu)] {
        ensure_finite(name, v)?;
    }
    if !(alpha > 0.0) || tau < 0.0 || nu < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "path needs alpha > 0, tau >= 0, nu >= 0; got {alpha}, {tau}, {nu}"
        )));
    }
    let beta = opts.ray_angle;
    if !(beta > 0.0 && beta < FRAC_PI_2) || !(opts.density > 0.0) || !(opts.inner_radius_cap > 0.0) {
        return Err(Error::InvalidParameter("path options out of range".into()));
    }
    let a2 = alpha * alpha;
    let mu = nu * a2;
    let t2 = a2 * tau;
    let x2 = opts.cosine_bound * opts.cosine_bound;
    let fine = opts.density;

    // The arc must stay inside the region where e^{2|α|²ρ} is not amplified
    // against the damping from τz.
    let rho = (0.5 * tau.sqrt()).max(0.5 / a2.max(1.0)).min(opts.inner_radius_cap);
    let cb = beta.cos();
    let s_min = (t2.min(1.0) * cb / 160.0).max(1e-300).min(0.5 * rho);
    let y_min = (1.5 * PI).max(t2 / (2.0 * (a2 + 20.0)));
    let depth = FRAC_PI_2 + ((y_min - FRAC_PI_2) / PI).ceil() * PI;
    let extent = 0.5 * ((a2 + 1.0).ln() + 40.0);
    let big = depth.hypot(extent);

    let rate_f = |f: C| {
        let r = f.norm();
        (t2 + 1.0) / (2.0 * r * r) + 2.0 * a2 * (2.0 * f.re).exp() + 2.0 * mu + 0.5 * x2 + 1.5 / r + 1.0
    };
    let rate_ray = |s: f64| {
        let mut r = 4.0 / s + 2.0 * a2 * (2.0 * s * cb).exp() + 2.0 * mu + 0.5 * x2 + 1.0;
        for c in [t2, 1.0] {
            if c * cb / (2.0 * s) < 80.0 {
                r += c / (2.0 * s * s);
            }
        }
        r
    };

    let mut panels = Vec::new();
    let down = C::new(0.0, -1.0);
    lay(
        &mut panels,
        Piece::Line { origin: C::new(0.0, 0.0), dir: C::from_polar(1.0, -beta) },
        s_min,
        rho,
        fine,
        rate_ray,
    );
    let arc = Piece::Arc { radius: rho };
    lay(&mut panels, arc, -beta, -FRAC_PI_2, fine, |p| rho * rate_f(arc.point(p)));
    let axis = Piece::Line { origin: C::new(0.0, 0.0), dir: down };
    lay(&mut panels, axis, rho, depth, fine, |y| rate_f(axis.point(y)));
    let leg = Piece::Line { origin: C::new(0.0, -depth), dir: C::new(-1.0, 0.0) };
    lay(&mut panels, leg, 0.0, extent, fine, |x| rate_f(leg.point(x)));
    let outer = Piece::Arc { radius: big };
    lay(&mut panels, outer, (-depth).atan2(-extent), -PI, fine, |p| big * rate_f(outer.point(p)));

    let geometry = PathGeometry {
        alpha,
        tau,
        nu,
        inner_radius: rho,
        ray_start: s_min,
        ray_angle: beta,
        depth,
        extent,
        cosine_bound: opts.cosine_bound,
    };
    let path = HankelPath::from_panels(panels, geometry, opts.tolerance);
    path.validate()?;
    Ok(path)
}

/// Splits `[a, b]` into panels whose length is `2/(rate·density)` at the left
/// end.
fn lay(out: &mut Vec<Panel>, piece: Piece, a: f64, b: f64, density: f64, rate: impl Fn(f64) -> f64) {
    let sign = if b > a { 1.0 } else { -1.0 };
    let eps = 1e-15 * a.abs().max(b.abs()).max(1.0);
    let mut s = a;
    while (b - s) * sign > eps {
        let h = (2.0 / (rate(s) * density)).min((b - s).abs());
        let next = if (b - s).abs() - h <= eps { b } else { s + sign * h };
        out.push(Panel { piece, a: s, b: next });
        s = next;
    }
}

/// Result of a contour quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourValue {
    pub value: f64,
    pub imag_residual: f64,
    pub error_estimate: f64,
    pub nodes: usize,
}

/// Sum of `g(z_j) w_j` with the exponent of `g` shifted by its maximum real
/// part. Returns the shifted sum, the sum of magnitudes and the shift.
fn shifted_sum(nodes: &[PathNode], log_term: impl Fn(&PathNode) -> (C, C) + Sync) -> (C, f64, f64) {
    // log_term returns (exponent, finite factor).
    let terms: Vec<(C, C)> = nodes.par_chunks(CHUNK).flat_map_iter(|c| c.iter().map(&log_term)).collect();
    let shift =
        terms.iter().filter(|(_, m)| *m != C::new(0.0, 0.0)).map(|(e, _)| e.re).fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return (C::new(0.0, 0.0), 0.0, 0.0);
    }
    let partial: Vec<(C, f64)> = terms
        .par_chunks(CHUNK)
        .zip(nodes.par_chunks(CHUNK))
        .map(|(tc, nc)| {
            let mut s = C::new(0.0, 0.0);
            let mut a = 0.0;
            for ((e, m), n) in tc.iter().zip(nc) {
                let v = (e - shift).exp() * m * n.weight;
                s += v;
                a += v.norm();
            }
            (s, a)
        })
        .collect();
    let (s, a) = partial.iter().fold((C::new(0.0, 0.0), 0.0), |(s, a), (ps, pa)| (s + ps, a + pa));
    (s, a, shift)
}

/// `expm1` on complex arguments without cancellation near zero.
fn expm1_c(w: C) -> C {
    let (a, b) = (w.re, w.im);
    let h = (0.5 * b).sin();
    C::new(a.exp_m1() * b.cos() - 2.0 * h * h, a.exp() * b.sin())
}

/// Raw quadrature of the inversion integrand with the `n = 0` term removed.
/// Returns (value, imaginary residual, rounding bound).
fn inversion_raw(alpha: f64, nu: f64, t: f64, nodes: &[PathNode]) -> (f64, f64, f64) {
    let a2 = alpha * alpha;
    let t2 = t * t;
    let mu = nu * a2;
    let (s, abs, shift) = shifted_sum(nodes, |n| {
        let z = n.z;
        let w = z.inv();
        let mut e = t2 * z - mu * w - a2 - 0.5 * z.ln();
        let kernel = a2 * (-w).exp();
        let m = if kernel.re > 1.0 {
            e += kernel;
            -expm1_c(-kernel)
        } else {
            expm1_c(kernel)
        };
        (e, m)
    });
    let scale = t / (2.0 * PI.sqrt()) * shift.exp();
    let value = -scale * s.im - (-a2).exp() * (2.0 * mu.sqrt() * t).cos();
    let imag = scale * s.re;
    (value, imag, 1e-15 * scale * abs)
}

fn contour_value(alpha: f64, nu: f64, t: f64, path: &HankelPath) -> Result<ContourValue> {
    path.validate()?;
    let (v, imag, rounding) = inversion_raw(alpha, nu, t, &path.nodes);
    let coarse = path.coarsened();
    let (vc, _, _) = inversion_raw(alpha, nu, t, &coarse.nodes);
    let error_estimate = (v - vc).abs() + rounding;
    if !v.is_finite() || !(error_estimate <= path.tolerance) {
        return Err(Error::Quadrature { estimate: error_estimate, tolerance: path.tolerance });
    }
    if !(imag.abs() < IMAG_RESIDUAL_BOUND) {
        return Err(Error::ImaginaryResidual { residual: imag.abs(), bound: IMAG_RESIDUAL_BOUND });
    }
    Ok(ContourValue { value: v, imag_residual: imag, error_estimate, nodes: path.nodes.len() })
}

fn bypass() -> ContourValue {
    ContourValue { value: -1.0, imag_residual: 0.0, error_estimate: 0.0, nodes: 0 }
}

/// Exact resonant inversion by quadrature of the loop integral.
pub fn inversion_contour_resonant(alpha: f64, t: f64, path: &HankelPath) -> Result<ContourValue> {
    ensure_finite("alpha", alpha)?;
    ensure_finite("t", t)?;
    if !(alpha > 0.0) || t < 0.0 {
        return Err(Error::InvalidParameter(format!("need alpha > 0 and t >= 0, got {alpha}, {t}")));
    }
    if t == 0.0 {
        return Ok(bypass());
    }
    contour_value(alpha, 0.0, t, path)
}

/// Quadrature of the detuned loop integral with phase `Φ(z, ν)`.
///
/// The result equals `−Σ W_n cos(2√(μ+n) t)`; add a static part to compare
/// with the full detuned sum.
pub fn inversion_contour_detuned(params: &ModelParams, t: f64, path: &HankelPath) -> Result<ContourValue> {
    ensure_finite("t", t)?;
    if !(params.alpha() > 0.0) || t < 0.0 {
        return Err(Error::InvalidParameter(format!("need alpha > 0 and t >= 0, got {}, {t}", params.alpha())));
    }
    if t == 0.0 {
        return Ok(bypass());
    }
    contour_value(params.alpha(), params.nu(), t, path)
}

/// Convenience: builds the matching path and evaluates the integral.
pub fn inversion_contour(params: &ModelParams, t: f64, opts: &PathOptions) -> Result<ContourValue> {
    if t == 0.0 {
        return Ok(bypass());
    }
    let tau = params.tau(t);
    let path = build_path(params.alpha(), tau, params.nu(), opts)?;
    inversion_contour_detuned(params, t, &path)
}

/// `cos x` from its loop representation on the given path.
pub fn cos_via_hankel(x: f64, path: &HankelPath) -> Result<f64> {
    ensure_finite("x", x)?;
    path.validate()?;
    if x.abs() > path.geometry.cosine_bound {
        return Err(Error::InvalidPath(format!("path resolves |x| <= {}, got {x}", path.geometry.cosine_bound)));
    }
    let q = 0.25 * x * x;
    let (s, _, shift) = shifted_sum(&path.nodes, |n| {
        let z = n.z;
        (z - q / z - 0.5 * z.ln(), C::new(1.0, 0.0))
    });
    // (1/(2√π i)) S
    let v = s * shift.exp() / C::new(0.0, 2.0 * PI.sqrt());
    if !(v.im.abs() < IMAG_RESIDUAL_BOUND) {
        return Err(Error::ImaginaryResidual { residual: v.im.abs(), bound: IMAG_RESIDUAL_BOUND });
    }
    Ok(v.re)
}
