//! C interface to `anglebisect`.
//!
//! Every function returns an [`AbStatus`]. On failure a description is
//! available from [`ab_last_error_message`] on the same thread. Runs are
//! opaque [`AbRun`] handles released with [`ab_run_free`]; strings handed
//! out by the library are released with [`ab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use anglebisect::engine::{refine, InitialShape, Refinement, RefinementRun};
use anglebisect::geometry::{aspect_ratio, TriangleNode};
use anglebisect::report::RefinementReport;
use anglebisect::symbolic::{jacobsthal, BaseAngles};
use anglebisect::verify::{run_suite, SuiteConfig};
use anglebisect::{Error, ProcedureKind};

pub const AB_PROCEDURE_LARGEST_ANGLE: u32 = 0;
pub const AB_PROCEDURE_LONGEST_EDGE: u32 = 1;
pub const AB_PROCEDURE_SHORTEST_ALTITUDE: u32 = 2;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Degenerate = 3,
    OutOfRange = 4,
    Internal = 5,
}

/// A finished refinement.
pub struct AbRun {
    run: RefinementRun,
    result: Refinement,
}

/// One generation's statistics. `rho` is NaN when `has_rho` is false.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AbGenerationStats {
    pub n: u32,
    pub triangle_count: u64,
    pub mesh: f64,
    pub min_angle_deg: f64,
    pub min_largest_angle_deg: f64,
    pub max_aspect_ratio: f64,
    pub rho: f64,
    pub has_rho: bool,
    pub cumulative_similarity_classes: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn status_of(e: &Error) -> AbStatus {
    match e {
        e if e.is_geometric() => AbStatus::Degenerate,
        Error::DepthLimit { .. } => AbStatus::OutOfRange,
        Error::Io(_) | Error::Serialization(_) => AbStatus::Internal,
        _ => AbStatus::InvalidInput,
    }
}

/// Runs `body`, turning errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), (AbStatus, String)>) -> AbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            AbStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AbStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (AbStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (AbStatus, String) {
    (AbStatus::NullPointer, format!("{what} is null"))
}

fn procedure(code: u32) -> Result<ProcedureKind, (AbStatus, String)> {
    match code {
        AB_PROCEDURE_LARGEST_ANGLE => Ok(ProcedureKind::LargestAngle),
        AB_PROCEDURE_LONGEST_EDGE => Ok(ProcedureKind::LongestEdge),
        AB_PROCEDURE_SHORTEST_ALTITUDE => Ok(ProcedureKind::ShortestAltitude),
        other => Err((AbStatus::InvalidInput, format!("unknown procedure code {other}"))),
    }
}

fn start_run(shape: InitialShape, code: u32, iterations: u32, out: *mut *mut AbRun) -> AbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let run = RefinementRun::new(shape, procedure(code)?, iterations);
        let result = refine(&run).map_err(lib_err)?;
        // SAFETY: `out` is non-null and the caller provides a writable slot.
        unsafe { *out = Box::into_raw(Box::new(AbRun { run, result })) };
        Ok(())
    })
}

fn to_c_string(text: String, out: *mut *mut c_char) -> Result<(), (AbStatus, String)> {
    let c = CString::new(text).map_err(|e| (AbStatus::Internal, e.to_string()))?;
    // SAFETY: callers check `out` for null first.
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Refines a triangle given by angles in degrees, e.g. `"60,60,60"` or
/// `"121/2,119/2,60"`. Exact angle tracking is used for the largest-angle
/// procedure.
///
/// # Safety
/// `angles` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ab_run_new_angles(
    angles: *const c_char,
    procedure: u32,
    iterations: u32,
    out: *mut *mut AbRun,
) -> AbStatus {
    if angles.is_null() {
        set_error("angles is null");
        return AbStatus::NullPointer;
    }
    // SAFETY: non-null and NUL-terminated per the contract.
    let text = unsafe { CStr::from_ptr(angles) }.to_string_lossy().into_owned();
    let base = match BaseAngles::parse(&text) {
        Ok(b) => b,
        Err(e) => {
            set_error(&e.to_string());
            return status_of(&e);
        }
    };
    start_run(InitialShape::Angles(base), procedure, iterations, out)
}

/// Refines a triangle given by its side lengths, in numeric mode.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ab_run_new_sides(
    a: f64,
    b: f64,
    c: f64,
    procedure: u32,
    iterations: u32,
    out: *mut *mut AbRun,
) -> AbStatus {
    start_run(InitialShape::Sides([a, b, c]), procedure, iterations, out)
}

/// # Safety
/// `run` must come from `ab_run_new_*` and not have been freed. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ab_run_free(run: *mut AbRun) {
    if !run.is_null() {
        // SAFETY: produced by Box::into_raw in `start_run`.
        drop(unsafe { Box::from_raw(run) });
    }
}

/// Number of generations, including generation 0.
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ab_run_generation_count(run: *const AbRun, out: *mut u32) -> AbStatus {
    guard(|| {
        // SAFETY: null-checked; liveness is the caller's contract.
        let run = unsafe { run.as_ref() }.ok_or_else(|| null("run"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        unsafe { *out = run.result.stats.len() as u32 };
        Ok(())
    })
}

/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ab_run_stats(run: *const AbRun, n: u32, out: *mut AbGenerationStats) -> AbStatus {
    guard(|| {
        // SAFETY: null-checked; liveness is the caller's contract.
        let run = unsafe { run.as_ref() }.ok_or_else(|| null("run"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = run.result.stats.get(n as usize).ok_or_else(|| {
            (AbStatus::OutOfRange, format!("generation {n} is past the end of the run"))
        })?;
        let stats = AbGenerationStats {
            n: s.n,
            triangle_count: s.triangle_count,
            mesh: s.mesh,
            min_angle_deg: s.min_angle.to_f64(),
            min_largest_angle_deg: s.min_largest_angle.to_f64(),
            max_aspect_ratio: s.max_aspect_ratio,
            rho: s.rho.unwrap_or(f64::NAN),
            has_rho: s.rho.is_some(),
            cumulative_similarity_classes: s.cumulative_similarity_classes,
        };
        unsafe { *out = stats };
        Ok(())
    })
}

/// The run's statistics as JSON. Free the result with `ab_string_free`.
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ab_run_to_json(run: *const AbRun, out: *mut *mut c_char) -> AbStatus {
    guard(|| {
        // SAFETY: null-checked; liveness is the caller's contract.
        let run = unsafe { run.as_ref() }.ok_or_else(|| null("run"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = RefinementReport::new(&run.run, &run.result).to_json().map_err(lib_err)?;
        to_c_string(json, out)
    })
}

/// # Safety
/// `s` must come from this library and not have been freed. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ab_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw in `to_c_string`.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn ab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Jacobsthal number `j_n`; `n` up to 65 fits in 64 bits.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ab_jacobsthal(n: u32, out: *mut u64) -> AbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let value = u64::try_from(jacobsthal(n))
            .map_err(|_| (AbStatus::OutOfRange, format!("j_{n} does not fit in 64 bits")))?;
        unsafe { *out = value };
        Ok(())
    })
}

/// `a / (b + c)` with `a` the longest of the three sides.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ab_aspect_ratio(a: f64, b: f64, c: f64, out: *mut f64) -> AbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let t = TriangleNode::from_sides([a, b, c]).map_err(lib_err)?;
        let r = aspect_ratio(&t).map_err(lib_err)?;
        unsafe { *out = r };
        Ok(())
    })
}

/// Runs the property-check suite and returns its JSON report.
/// `passed` may be null.
///
/// # Safety
/// `out` must be writable; `passed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ab_verify_json(
    depth: u32,
    sweep: u32,
    seed: u64,
    out: *mut *mut c_char,
    passed: *mut bool,
) -> AbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let report = run_suite(SuiteConfig {
            depth,
            sweep_size: sweep as usize,
            seed,
        })
        .map_err(lib_err)?;
        if !passed.is_null() {
            unsafe { *passed = report.passed };
        }
        to_c_string(report.to_json().map_err(lib_err)?, out)
    })
}
