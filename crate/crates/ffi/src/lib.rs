//! C ABI for the singint toolkit.
//!
//! Curves, exponents and weights are opaque heap handles created by the
//! `*_new`-style constructors and released by the matching `*_free`
//! function. Every fallible call returns a [`SingintStatus`]; on failure
//! [`singint_last_error`] returns a message for the calling thread that
//! stays valid until the next failing call on that thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use singint::conditions::{ap_constant, GridSpec, Verdict};
use singint::exponent::{ExponentFunction, ExponentSpec};
use singint::geometry::CurvePath;
use singint::operator::{discretize, discretize_graded, weighted_opnorm, GradedMesh, OpnormOptions};
use singint::vlebesgue::{luxemburg_norm, SampledFunction};
use singint::weights::{mo_indices, CompositeWeight, RadialRule, WeightFactor};
use singint::Error;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingintStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidGeometry = 2,
    NotRectifiable = 3,
    PointNotOnCurve = 4,
    InvalidParameter = 5,
    InvalidRadius = 6,
    SingularPoint = 7,
    NonConvergence = 8,
    Overflow = 9,
    DimensionMismatch = 10,
    DegenerateStencil = 11,
    Parse = 12,
    Io = 13,
    Panic = 14,
}

/// Verdict of a grid supremum.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingintVerdict {
    Finite = 0,
    Diverging = 1,
    Inconclusive = 2,
}

/// Opaque polyline curve.
pub struct SingintCurve {
    inner: CurvePath,
}

/// Opaque variable exponent bound to the curve it was built on.
pub struct SingintExponent {
    inner: ExponentFunction,
}

/// Opaque composite radial weight.
pub struct SingintWeight {
    inner: CompositeWeight,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SingintStatus {
    match e {
        Error::InvalidGeometry(_) => SingintStatus::InvalidGeometry,
        Error::NotRectifiable { .. } => SingintStatus::NotRectifiable,
        Error::PointNotOnCurve { .. } => SingintStatus::PointNotOnCurve,
        Error::InvalidParameter { .. } => SingintStatus::InvalidParameter,
        Error::InvalidRadius { .. } => SingintStatus::InvalidRadius,
        Error::SingularPoint { .. } => SingintStatus::SingularPoint,
        Error::NonConvergence { .. } => SingintStatus::NonConvergence,
        Error::Overflow(_) => SingintStatus::Overflow,
        Error::DimensionMismatch { .. } => SingintStatus::DimensionMismatch,
        Error::DegenerateStencil(_) => SingintStatus::DegenerateStencil,
        Error::Parse { .. } => SingintStatus::Parse,
        Error::Io { .. } => SingintStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SingintStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SingintStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            SingintStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            SingintStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn get_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failing call on this thread; empty if none.
#[no_mangle]
pub extern "C" fn singint_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

fn emit_curve(out: *mut *mut SingintCurve, curve: CurvePath) -> Result<(), Failure> {
    unsafe { put(out, Box::into_raw(Box::new(SingintCurve { inner: curve })), "out") }
}

/// Straight segment from `(ax, ay)` to `(bx, by)` with `nodes` nodes.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn singint_curve_segment(
    ax: f64,
    ay: f64,
    bx: f64,
    by: f64,
    nodes: usize,
    out: *mut *mut SingintCurve,
) -> SingintStatus {
    guard(|| emit_curve(out, CurvePath::segment(Complex64::new(ax, ay), Complex64::new(bx, by), nodes)?))
}

/// Circle of radius `r` around `(cx, cy)` with `nodes` nodes.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn singint_curve_circle(cx: f64, cy: f64, r: f64, nodes: usize, out: *mut *mut SingintCurve) -> SingintStatus {
    guard(|| emit_curve(out, CurvePath::circle(Complex64::new(cx, cy), r, nodes)?))
}

/// The curve `x + i x^alpha sin(1/x)` on `[0, 1]` at the given resolution.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn singint_curve_spiral(alpha: f64, resolution: usize, out: *mut *mut SingintCurve) -> SingintStatus {
    guard(|| emit_curve(out, CurvePath::spiral_example(alpha, resolution)?))
}

/// Polyline through `n` points given as coordinate arrays.
///
/// # Safety
/// `xs` and `ys` must each point to `n` readable doubles; `out` must be a
/// valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn singint_curve_polyline(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    closed: bool,
    out: *mut *mut SingintCurve,
) -> SingintStatus {
    guard(|| {
        if xs.is_null() || ys.is_null() {
            return Err(Failure::Null("xs/ys"));
        }
        let xs = std::slice::from_raw_parts(xs, n);
        let ys = std::slice::from_raw_parts(ys, n);
        let pts = xs.iter().zip(ys).map(|(x, y)| Complex64::new(*x, *y)).collect();
        emit_curve(out, CurvePath::build_polyline(pts, closed)?)
    })
}

/// Releases a curve; null is ignored.
///
/// # Safety
/// `curve` must be null or a handle from a curve constructor not yet freed.
#[no_mangle]
pub unsafe extern "C" fn singint_curve_free(curve: *mut SingintCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Arc length of the curve.
///
/// # Safety
/// `curve` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn singint_curve_length(curve: *const SingintCurve, out: *mut f64) -> SingintStatus {
    guard(|| put(out, get(curve, "curve")?.inner.length(), "out"))
}

/// Number of curve nodes.
///
/// # Safety
/// `curve` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn singint_curve_node_count(curve: *const SingintCurve, out: *mut usize) -> SingintStatus {
    guard(|| put(out, get(curve, "curve")?.inner.node_count(), "out"))
}

/// Grid estimate of the Carleson constant `sup |Γ(t,R)|/R`.
///
/// # Safety
/// `curve` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn singint_curve_carleson(
    curve: *const SingintCurve,
    t_samples: usize,
    r_samples: usize,
    out: *mut f64,
) -> SingintStatus {
    guard(|| {
        let k = get(curve, "curve")?.inner.carleson_constant(t_samples, r_samples)?;
        put(out, k, "out")
    })
}

fn emit_exponent(out: *mut *mut SingintExponent, p: ExponentFunction) -> Result<(), Failure> {
    unsafe { put(out, Box::into_raw(Box::new(SingintExponent { inner: p })), "out") }
}

/// Constant exponent `p > 1` on the nodes of `curve`.
///
/// # Safety
/// `curve` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn singint_exponent_constant(
    curve: *const SingintCurve,
    p: f64,
    out: *mut *mut SingintExponent,
) -> SingintStatus {
    guard(|| emit_exponent(out, ExponentFunction::constant(&get(curve, "curve")?.inner, p)?))
}

/// Radial exponent `base + amplitude / (2 - ln|τ - c|)`, clipped to
/// `[1.01, 100]`.
///
/// # Safety
/// `curve` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn singint_exponent_radial(
    curve: *const SingintCurve,
    cx: f64,
    cy: f64,
    base: f64,
    amplitude: f64,
    out: *mut *mut SingintExponent,
) -> SingintStatus {
    guard(|| {
        let spec = ExponentSpec::Radial { center: Complex64::new(cx, cy), base, amplitude };
        emit_exponent(out, ExponentFunction::from_spec(&get(curve, "curve")?.inner, &spec)?)
    })
}

/// Releases an exponent; null is ignored.
///
/// # Safety
/// `p` must be null or a handle from an exponent constructor not yet freed.
#[no_mangle]
pub unsafe extern "C" fn singint_exponent_free(p: *mut SingintExponent) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Creates the unit weight `w ≡ 1`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn singint_weight_new(out: *mut *mut SingintWeight) -> SingintStatus {
    guard(|| put(out, Box::into_raw(Box::new(SingintWeight { inner: CompositeWeight::unit() })), "out"))
}

fn add_factor(w: *mut SingintWeight, anchor: Complex64, rule: RadialRule) -> Result<(), Failure> {
    let w = unsafe { get_mut(w, "weight")? };
    let mut factors = w.inner.factors().to_vec();
    factors.push(WeightFactor { anchor, rule });
    w.inner = CompositeWeight::new(factors)?;
    Ok(())
}

/// Multiplies the weight by `|τ - a|^gamma`.
///
/// # Safety
/// `w` must be a live weight handle.
#[no_mangle]
pub unsafe extern "C" fn singint_weight_add_power(w: *mut SingintWeight, ax: f64, ay: f64, gamma: f64) -> SingintStatus {
    guard(|| add_factor(w, Complex64::new(ax, ay), RadialRule::Power { gamma }))
}

/// Multiplies the weight by `x^gamma exp(amp sin(freq ln x))` with
/// `x = |τ - a|`.
///
/// # Safety
/// `w` must be a live weight handle.
#[no_mangle]
pub unsafe extern "C" fn singint_weight_add_oscillating(
    w: *mut SingintWeight,
    ax: f64,
    ay: f64,
    gamma: f64,
    amp: f64,
    freq: f64,
) -> SingintStatus {
    guard(|| add_factor(w, Complex64::new(ax, ay), RadialRule::Oscillating { gamma, amp, freq }))
}

/// Number of factors of the weight.
///
/// # Safety
/// `w` must be a live weight handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn singint_weight_factor_count(w: *const SingintWeight, out: *mut usize) -> SingintStatus {
    guard(|| put(out, get(w, "weight")?.inner.factors().len(), "out"))
}

/// Releases a weight; null is ignored.
///
/// # Safety
/// `w` must be null or a handle from [`singint_weight_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn singint_weight_free(w: *mut SingintWeight) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Matuszewska–Orlicz indices `(m, M)` of factor `k`, with dilations capped
/// at `cap`.
///
/// # Safety
/// `w` must be a live weight handle; `m` and `big_m` must be writable.
#[no_mangle]
pub unsafe extern "C" fn singint_mo_indices(
    w: *const SingintWeight,
    k: usize,
    cap: f64,
    m: *mut f64,
    big_m: *mut f64,
) -> SingintStatus {
    guard(|| {
        let w = get(w, "weight")?;
        let f = w.inner.factors().get(k).ok_or_else(|| Error::InvalidParameter {
            name: "k",
            reason: format!("factor index {k} out of range"),
        })?;
        let idx = mo_indices(&f.rule, cap)?;
        put(m, idx.alpha, "m")?;
        put(big_m, idx.beta, "big_m")
    })
}

/// Luxemburg–Nakano norm of nodal values `re + i im` on `curve`; `im`
/// may be null for real data.
///
/// # Safety
/// Handles must be live; `re` (and `im` unless null) must point to `n`
/// readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn singint_luxemburg_norm(
    curve: *const SingintCurve,
    w: *const SingintWeight,
    p: *const SingintExponent,
    re: *const f64,
    im: *const f64,
    n: usize,
    out: *mut f64,
) -> SingintStatus {
    guard(|| {
        let (curve, w, p) = (get(curve, "curve")?, get(w, "weight")?, get(p, "exponent")?);
        if re.is_null() {
            return Err(Failure::Null("re"));
        }
        let re = std::slice::from_raw_parts(re, n);
        let values = if im.is_null() {
            re.iter().map(|x| Complex64::new(*x, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, n);
            re.iter().zip(im).map(|(x, y)| Complex64::new(*x, *y)).collect()
        };
        let f = SampledFunction::new(values)?;
        put(out, luxemburg_norm(&f, &w.inner, &p.inner, &curve.inner)?, "out")
    })
}

/// Grid supremum of the Muckenhoupt-type constant with the default grid
/// and the given seed.
///
/// # Safety
/// Handles must be live; `estimate` and `verdict` must be writable.
#[no_mangle]
pub unsafe extern "C" fn singint_ap_constant(
    curve: *const SingintCurve,
    p: *const SingintExponent,
    w: *const SingintWeight,
    seed: u64,
    estimate: *mut f64,
    verdict: *mut SingintVerdict,
) -> SingintStatus {
    guard(|| {
        let (curve, p, w) = (get(curve, "curve")?, get(p, "exponent")?, get(w, "weight")?);
        let grid = GridSpec { seed, ..GridSpec::default() };
        let r = ap_constant(&curve.inner, &p.inner, &w.inner, &grid)?;
        put(estimate, r.constant_estimate, "estimate")?;
        let v = match r.verdict {
            Verdict::Finite => SingintVerdict::Finite,
            Verdict::Diverging => SingintVerdict::Diverging,
            Verdict::Inconclusive => SingintVerdict::Inconclusive,
        };
        put(verdict, v, "verdict")
    })
}

/// Lower bound on the norm of the Cauchy singular integral on
/// `L^{p(·)}(Γ, w)` from a discretization with `nodes` nodes: interleaved
/// on closed curves, graded toward the weight anchors on open ones.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn singint_opnorm(
    curve: *const SingintCurve,
    w: *const SingintWeight,
    p: *const SingintExponent,
    nodes: usize,
    trials: usize,
    seed: u64,
    out: *mut f64,
) -> SingintStatus {
    guard(|| {
        let (curve, w, p) = (get(curve, "curve")?, get(w, "weight")?, get(p, "exponent")?);
        let op = if curve.inner.is_closed() {
            discretize(&curve.inner, nodes)?
        } else {
            discretize_graded(&curve.inner, &w.inner.anchors(), nodes, GradedMesh::default())?
        };
        let opts = OpnormOptions { trials, seed, ..OpnormOptions::default() };
        put(out, weighted_opnorm(&op, &w.inner, &p.inner, &opts)?.value, "out")
    })
}
