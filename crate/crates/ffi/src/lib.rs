//! C ABI for `globenv`.
//!
//! Curve sets and envelopes cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every fallible call
//! returns a [`GeStatus`]; the message of the last failure on the calling
//! thread is available from [`ge_last_error_message`]. Matrices are passed
//! row-major, curve by curve.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use globenv::sim::simulate_extract;
use globenv::{
    build_envelope, central_curve, classify, compute_measure, CurveSet, Error, GlobalEnvelope,
    GpConfig, MeasureKind, OutlierKind,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeStatus {
    Ok = 0,
    InvalidInput = 1,
    DegenerateData = 2,
    Resource = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeMeasure {
    Rank = 0,
    Erl = 1,
    Cont = 2,
    Area = 3,
    Qdir = 4,
}

impl From<GeMeasure> for MeasureKind {
    fn from(m: GeMeasure) -> Self {
        match m {
            GeMeasure::Rank => MeasureKind::Rank,
            GeMeasure::Erl => MeasureKind::Erl,
            GeMeasure::Cont => MeasureKind::Cont,
            GeMeasure::Area => MeasureKind::Area,
            GeMeasure::Qdir => MeasureKind::Qdir,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeOutlier {
    None = 0,
    Integral = 1,
    Maximum = 2,
}

impl From<GeOutlier> for OutlierKind {
    fn from(o: GeOutlier) -> Self {
        match o {
            GeOutlier::None => OutlierKind::None,
            GeOutlier::Integral => OutlierKind::Integral,
            GeOutlier::Maximum => OutlierKind::Maximum,
        }
    }
}

/// Opaque curve set.
pub struct GeCurveSet(CurveSet);

/// Opaque envelope together with its central curve and per-curve verdicts.
pub struct GeEnvelope {
    envelope: GlobalEnvelope,
    central: Vec<f64>,
    extreme: Vec<bool>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: GeStatus, msg: impl Into<String>) -> GeStatus {
    set_last_error(msg.into());
    status
}

fn status_of(err: Error) -> GeStatus {
    let status = match &err {
        Error::InvalidInput(_) | Error::Parse(_) => GeStatus::InvalidInput,
        Error::DegenerateData(_) => GeStatus::DegenerateData,
        Error::Resource { .. } => GeStatus::Resource,
        _ => GeStatus::Internal,
    };
    fail(status, err.to_string())
}

/// Runs `body`, mapping errors and panics to status codes.
fn guard(body: impl FnOnce() -> Result<(), GeStatus>) -> GeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => GeStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(GeStatus::Internal, "panic inside globenv"),
    }
}

fn lift<T>(r: globenv::Result<T>) -> Result<T, GeStatus> {
    r.map_err(status_of)
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), GeStatus> {
    if p.is_null() {
        Err(fail(GeStatus::NullPointer, format!("{name} is NULL")))
    } else {
        Ok(())
    }
}

fn check_len(len: usize, needed: usize, name: &str) -> Result<(), GeStatus> {
    if len < needed {
        Err(fail(
            GeStatus::BufferTooSmall,
            format!("{name} holds {len} values, {needed} needed"),
        ))
    } else {
        Ok(())
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ge_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty when none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ge_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Copies `s * d` row-major values into a new curve set.
///
/// `grid` may be NULL, in which case the grid is `k / d`, `k = 1..d`.
///
/// # Safety
/// `values` must point to `s * d` readable doubles, `grid` (when not NULL) to
/// `d` doubles, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ge_curveset_new(
    values: *const f64,
    s: usize,
    d: usize,
    grid: *const f64,
    out: *mut *mut GeCurveSet,
) -> GeStatus {
    guard(|| {
        non_null(values, "values")?;
        non_null(out, "out")?;
        let n = s
            .checked_mul(d)
            .ok_or_else(|| fail(GeStatus::InvalidInput, "s * d overflows"))?;
        let values = std::slice::from_raw_parts(values, n).to_vec();
        let set = if grid.is_null() {
            if d == 0 {
                return Err(fail(GeStatus::InvalidInput, "d must be at least 1"));
            }
            lift(CurveSet::with_unit_grid(values, s))?
        } else {
            let grid = std::slice::from_raw_parts(grid, d).to_vec();
            lift(CurveSet::new(values, grid, s))?
        };
        *out = Box::into_raw(Box::new(GeCurveSet(set)));
        Ok(())
    })
}

/// Simulates `s` curves at resolution `d` (a divisor of 2500), adding the
/// chosen outlier to curve 1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ge_simulate(
    s: usize,
    d: usize,
    scale: f64,
    outlier: GeOutlier,
    seed: u64,
    out: *mut *mut GeCurveSet,
) -> GeStatus {
    guard(|| {
        non_null(out, "out")?;
        let set = lift(simulate_extract(&GpConfig::new(scale, seed), outlier.into(), s, d))?;
        *out = Box::into_raw(Box::new(GeCurveSet(set)));
        Ok(())
    })
}

/// # Safety
/// `set` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ge_curveset_free(set: *mut GeCurveSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// # Safety
/// `set` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ge_curveset_num_curves(set: *const GeCurveSet) -> usize {
    set.as_ref().map_or(0, |c| c.0.num_curves())
}

/// # Safety
/// `set` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ge_curveset_num_points(set: *const GeCurveSet) -> usize {
    set.as_ref().map_or(0, |c| c.0.num_points())
}

/// Copies the row-major values into `out`, which must hold `s * d` doubles.
///
/// # Safety
/// `set` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ge_curveset_values(
    set: *const GeCurveSet,
    out: *mut f64,
    len: usize,
) -> GeStatus {
    guard(|| {
        non_null(set, "set")?;
        non_null(out, "out")?;
        let v = (*set).0.values();
        check_len(len, v.len(), "out")?;
        ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
        Ok(())
    })
}

/// Writes the `s` measure values (smaller = more extreme) into `out`.
/// `beta` is the qdir tail probability and is ignored by the other measures.
///
/// # Safety
/// `set` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ge_measure(
    set: *const GeCurveSet,
    measure: GeMeasure,
    beta: f64,
    out: *mut f64,
    len: usize,
) -> GeStatus {
    guard(|| {
        non_null(set, "set")?;
        non_null(out, "out")?;
        let (m, _) = lift(compute_measure(&(*set).0, measure.into(), beta))?;
        check_len(len, m.len(), "out")?;
        ptr::copy_nonoverlapping(m.m.as_ptr(), out, m.len());
        Ok(())
    })
}

/// Builds the global envelope at level `alpha`.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ge_envelope_new(
    set: *const GeCurveSet,
    measure: GeMeasure,
    alpha: f64,
    beta: f64,
    out: *mut *mut GeEnvelope,
) -> GeStatus {
    guard(|| {
        non_null(set, "set")?;
        non_null(out, "out")?;
        let curves = &(*set).0;
        let kind = measure.into();
        let (m, params) = lift(compute_measure(curves, kind, beta))?;
        let envelope = lift(build_envelope(curves, &m, alpha, params.as_ref()))?;
        let central = lift(central_curve(curves, &envelope, kind, params.as_ref()))?;
        let extreme = classify(&m, envelope.crit);
        *out = Box::into_raw(Box::new(GeEnvelope { envelope, central, extreme }));
        Ok(())
    })
}

/// # Safety
/// `env` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ge_envelope_free(env: *mut GeEnvelope) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Critical value `m_(alpha)`; NaN for a NULL handle.
///
/// # Safety
/// `env` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ge_envelope_crit(env: *const GeEnvelope) -> f64 {
    env.as_ref().map_or(f64::NAN, |e| e.envelope.crit)
}

/// Copies lower and upper bounds, and the central curve when `central` is not NULL.
///
/// # Safety
/// `env` must be a live handle; each non-NULL buffer must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ge_envelope_bounds(
    env: *const GeEnvelope,
    lower: *mut f64,
    upper: *mut f64,
    central: *mut f64,
    len: usize,
) -> GeStatus {
    guard(|| {
        non_null(env, "env")?;
        non_null(lower, "lower")?;
        non_null(upper, "upper")?;
        let e = &*env;
        let d = e.envelope.lower.len();
        check_len(len, d, "bounds")?;
        ptr::copy_nonoverlapping(e.envelope.lower.as_ptr(), lower, d);
        ptr::copy_nonoverlapping(e.envelope.upper.as_ptr(), upper, d);
        if !central.is_null() {
            ptr::copy_nonoverlapping(e.central.as_ptr(), central, d);
        }
        Ok(())
    })
}

/// Writes 1 for every curve outside the envelope (`M_i < m_(alpha)`), else 0.
///
/// # Safety
/// `env` must be a live handle and `out` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ge_envelope_extreme(
    env: *const GeEnvelope,
    out: *mut u8,
    len: usize,
) -> GeStatus {
    guard(|| {
        non_null(env, "env")?;
        non_null(out, "out")?;
        let flags = &(*env).extreme;
        check_len(len, flags.len(), "out")?;
        for (i, &f) in flags.iter().enumerate() {
            *out.add(i) = u8::from(f);
        }
        Ok(())
    })
}

/// Tests whether curve 1 is among the `alpha s` most extreme curves.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ge_detect_first(
    set: *const GeCurveSet,
    measure: GeMeasure,
    alpha: f64,
    out: *mut bool,
) -> GeStatus {
    guard(|| {
        non_null(set, "set")?;
        non_null(out, "out")?;
        *out = lift(globenv::detect_first(&(*set).0, measure.into(), alpha))?;
        Ok(())
    })
}

/// 95% Wilson score interval for `detections` out of `reps`.
///
/// # Safety
/// `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ge_wilson_ci(
    detections: usize,
    reps: usize,
    lo: *mut f64,
    hi: *mut f64,
) -> GeStatus {
    guard(|| {
        non_null(lo, "lo")?;
        non_null(hi, "hi")?;
        if reps == 0 || detections > reps {
            return Err(fail(GeStatus::InvalidInput, "need 0 <= detections <= reps and reps >= 1"));
        }
        let (a, b) = globenv::wilson_ci(detections, reps);
        *lo = a;
        *hi = b;
        Ok(())
    })
}
