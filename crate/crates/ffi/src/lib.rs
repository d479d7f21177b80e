//! C ABI over `jcsum`.
//!
//! Every fallible function returns a [`JcStatus`]; on failure the message is
//! available from [`jc_last_error_message`] on the same thread. Objects are
//! opaque handles created by `*_new` and released by the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use jcsum::exact::{inversion_exact, static_part_of, ModelParams, PhotonDistribution, DEFAULT_TAIL_TOLERANCE};
use jcsum::hankel::{inversion_contour, PathOptions};
use jcsum::lambert::{generalized_lambert, lambert_w, BranchIndex, GeneralizedLambertQuery};
use jcsum::saddle::{inversion_saddle, Policy, SaddleSet};
use jcsum::Error;
use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Domain = 3,
    NoConvergence = 4,
    Quadrature = 5,
    ImaginaryResidual = 6,
    WrongBranch = 7,
    BranchJump = 8,
    InvalidPath = 9,
    InterpolationGap = 10,
    Io = 11,
    Panic = 12,
}

/// How saddle contributions are combined.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JcPolicy {
    Sum = 0,
    Max = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JcComplex {
    pub re: f64,
    pub im: f64,
}

/// Contour quadrature result.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JcContourValue {
    pub value: f64,
    pub error_estimate: f64,
    pub imag_residual: f64,
    pub nodes: usize,
}

/// Coherent-state model: amplitude, detuning and photon weights.
pub struct JcModel {
    params: ModelParams,
    dist: PhotonDistribution,
}

/// Traced saddle trajectories for one model.
pub struct JcSaddles {
    set: SaddleSet,
    branches: Vec<BranchIndex>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> JcStatus {
    match e {
        Error::InvalidParameter(_) | Error::Config(_) => JcStatus::InvalidParameter,
        Error::Domain(_) => JcStatus::Domain,
        Error::NoConvergence { .. } => JcStatus::NoConvergence,
        Error::Quadrature { .. } => JcStatus::Quadrature,
        Error::ImaginaryResidual { .. } => JcStatus::ImaginaryResidual,
        Error::WrongBranch(_) => JcStatus::WrongBranch,
        Error::BranchJump { .. } => JcStatus::BranchJump,
        Error::InvalidPath(_) => JcStatus::InvalidPath,
        Error::InterpolationGap { .. } => JcStatus::InterpolationGap,
        Error::Io(_) => JcStatus::Io,
    }
}

/// Runs `f`, recording errors and turning panics into [`JcStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), (JcStatus, String)>) -> JcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => JcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside jcsum".into());
            JcStatus::Panic
        }
    }
}

fn lift(e: Error) -> (JcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (JcStatus, String) {
    (JcStatus::NullPointer, format!("{what} is null"))
}

/// Writes `v` through `out`.
///
/// # Safety
/// `out` must be null or valid for writes.
unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), (JcStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn jc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn jc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a model with amplitude `alpha > 0` and scaled detuning `nu >= 0`.
///
/// # Safety
/// `out` must be valid for writes. The handle is released by [`jc_model_free`].
#[no_mangle]
pub unsafe extern "C" fn jc_model_new(alpha: f64, nu: f64, out: *mut *mut JcModel) -> JcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = ModelParams::from_nu(alpha, nu).map_err(lift)?;
        let dist = PhotonDistribution::poisson(alpha, DEFAULT_TAIL_TOLERANCE).map_err(lift)?;
        out.write(Box::into_raw(Box::new(JcModel { params, dist })));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from [`jc_model_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn jc_model_free(model: *mut JcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Time-independent part of the exact sum.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jc_static_part(model: *const JcModel, out: *mut f64) -> JcStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let v = static_part_of(&m.dist, m.params.mu()).map_err(lift)?;
        write(out, v, "out")
    })
}

/// Exact inversion at `t` (λt units).
///
/// # Safety
/// `model` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jc_inversion_exact(model: *const JcModel, t: f64, out: *mut f64) -> JcStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let v = inversion_exact(&m.dist, &m.params, t).map_err(lift)?;
        write(out, v, "out")
    })
}

/// Exact inversion on `n` times; `times` and `out` hold `n` values.
///
/// # Safety
/// `model` must be a live handle, `times` valid for `n` reads and `out` for
/// `n` writes.
#[no_mangle]
pub unsafe extern "C" fn jc_inversion_exact_many(
    model: *const JcModel,
    times: *const f64,
    n: usize,
    out: *mut f64,
) -> JcStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if n == 0 {
            return Ok(());
        }
        if times.is_null() || out.is_null() {
            return Err(null("times or out"));
        }
        let ts = std::slice::from_raw_parts(times, n);
        let dst = std::slice::from_raw_parts_mut(out, n);
        for (d, &t) in dst.iter_mut().zip(ts) {
            *d = inversion_exact(&m.dist, &m.params, t).map_err(lift)?;
        }
        Ok(())
    })
}

/// Hankel-contour quadrature of the inversion at `t` with the default path.
/// For `nu > 0` this is the unit-weight sum, without the static part.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jc_inversion_contour(model: *const JcModel, t: f64, out: *mut JcContourValue) -> JcStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let c = inversion_contour(&m.params, t, &PathOptions::default()).map_err(lift)?;
        let v = JcContourValue {
            value: c.value,
            error_estimate: c.error_estimate,
            imag_residual: c.imag_residual,
            nodes: c.nodes,
        };
        write(out, v, "out")
    })
}

/// Traces saddle trajectories `branches[0..n]` up to time `t_max`.
///
/// # Safety
/// `model` must be a live handle, `branches` valid for `n` reads and `out`
/// for writes. The handle is released by [`jc_saddles_free`].
#[no_mangle]
pub unsafe extern "C" fn jc_saddles_new(
    model: *const JcModel,
    branches: *const i32,
    n: usize,
    t_max: f64,
    out: *mut *mut JcSaddles,
) -> JcStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() || branches.is_null() {
            return Err(null("out or branches"));
        }
        if n == 0 {
            return Err((JcStatus::InvalidParameter, "at least one branch is required".into()));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err((JcStatus::InvalidParameter, format!("t_max must be positive, got {t_max}")));
        }
        let branches: Vec<BranchIndex> =
            std::slice::from_raw_parts(branches, n).iter().map(|&k| BranchIndex::new(k)).collect();
        let set = SaddleSet::trace(m.params.nu(), &branches, m.params.tau(t_max)).map_err(lift)?;
        out.write(Box::into_raw(Box::new(JcSaddles { set, branches })));
        Ok(())
    })
}

/// Releases traced trajectories. Null is ignored.
///
/// # Safety
/// `saddles` must come from [`jc_saddles_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn jc_saddles_free(saddles: *mut JcSaddles) {
    if !saddles.is_null() {
        drop(Box::from_raw(saddles));
    }
}

/// Saddle-point inversion at `t`, without the static part.
///
/// # Safety
/// `model` and `saddles` must be live handles, with `saddles` traced for
/// `model`, and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jc_inversion_saddle(
    model: *const JcModel,
    saddles: *const JcSaddles,
    t: f64,
    policy: JcPolicy,
    out: *mut f64,
) -> JcStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let s = saddles.as_ref().ok_or_else(|| null("saddles"))?;
        let policy = match policy {
            JcPolicy::Sum => Policy::Sum,
            JcPolicy::Max => Policy::Max,
        };
        let v = inversion_saddle(&m.params, t, &s.set, &s.branches, policy).map_err(lift)?;
        write(out, v.total, "out")
    })
}

/// `W_k(u)`; `conjugate` selects the mirrored branch `conj(W_k(conj u))`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jc_lambert_w(k: i32, conjugate: bool, u: JcComplex, out: *mut JcComplex) -> JcStatus {
    guard(|| {
        let b = BranchIndex { k, conjugate_copy: conjugate };
        let w = lambert_w(b, Complex64::new(u.re, u.im)).map_err(lift)?;
        write(out, JcComplex { re: w.re, im: w.im }, "out")
    })
}

/// Solution `w` of `w (ν + e^{2w})^{1/2} = ±u` continued from `W_k` at `ν = 0`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jc_generalized_lambert(k: i32, u: JcComplex, nu: f64, out: *mut JcComplex) -> JcStatus {
    guard(|| {
        let q = GeneralizedLambertQuery { u: Complex64::new(u.re, u.im), nu, branch: BranchIndex::new(k) };
        let g = generalized_lambert(&q, None).map_err(lift)?;
        write(out, JcComplex { re: g.w.re, im: g.w.im }, "out")
    })
}
