//! C ABI for `handsoff`.
//!
//! Objects are opaque heap handles created by `*_new`/`ho_solve` and released
//! with the matching `*_free`. Every fallible call returns an [`HoStatus`];
//! on failure, `ho_last_error` returns a message for the calling thread.
//! Arrays are passed as pointer plus length; matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use handsoff::pmp::find_certificate;
use handsoff::solver::{self, transcribe, SparseSolveResult};
use handsoff::lti::DEFAULT_ZERO_TOL;
use handsoff::{HandsoffError, LtiSystem};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoStatus {
    Ok = 0,
    InvalidArgument = 1,
    NotReachable = 2,
    NullPointer = 3,
    BufferTooSmall = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoMethod {
    Handsoff = 0,
    L1 = 1,
    Reweighted = 2,
}

impl HoMethod {
    fn from_raw(raw: i32) -> Option<Self> {
        match raw {
            0 => Some(HoMethod::Handsoff),
            1 => Some(HoMethod::L1),
            2 => Some(HoMethod::Reweighted),
            _ => None,
        }
    }
}

/// Opaque linear system handle.
pub struct HoSystem {
    inner: LtiSystem,
}

/// Opaque solve result handle.
pub struct HoSolution {
    result: SparseSolveResult,
    certified: bool,
    max_violation: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &HandsoffError) -> HoStatus {
    match err {
        HandsoffError::NotReachable { .. } => HoStatus::NotReachable,
        HandsoffError::Lp(_) | HandsoffError::Geometry(_) => HoStatus::Numerical,
        _ => HoStatus::InvalidArgument,
    }
}

/// Run `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), (HoStatus, String)>) -> HoStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            HoStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HoStatus::Panic
        }
    }
}

fn lib(err: HandsoffError) -> (HoStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (HoStatus, String) {
    (HoStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (HoStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn system_ref<'a>(sys: *const HoSystem) -> Result<&'a LtiSystem, (HoStatus, String)> {
    sys.as_ref().map(|s| &s.inner).ok_or_else(|| null("system"))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ho_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a NUL-terminated static string.
#[no_mangle]
pub extern "C" fn ho_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build a system `x' = A x + b u` from row-major `a` (n×n) and `b` (n).
///
/// # Safety
/// `a` must point to `n*n` doubles, `b` to `n` doubles, `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ho_system_new(n: usize, a: *const f64, b: *const f64, out: *mut *mut HoSystem) -> HoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let a = slice(a, n.saturating_mul(n), "a")?;
        let b = slice(b, n, "b")?;
        let rows: Vec<Vec<f64>> = a.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
        let inner = LtiSystem::from_rows(&rows, b, None).map_err(lib)?;
        *out = Box::into_raw(Box::new(HoSystem { inner }));
        Ok(())
    })
}

/// The double integrator `x1' = x2, x2' = u`.
#[no_mangle]
pub extern "C" fn ho_system_double_integrator() -> *mut HoSystem {
    Box::into_raw(Box::new(HoSystem { inner: LtiSystem::double_integrator() }))
}

/// # Safety
/// `sys` must be null or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn ho_system_free(sys: *mut HoSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// State dimension, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ho_system_dim(sys: *const HoSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.n())
}

/// Solve for a sparse control on a grid of `grid` intervals over `[0, horizon]`.
/// `method` is an `HoMethod` value; `p` is only used by `HO_METHOD_REWEIGHTED`.
///
/// # Safety
/// `sys` must be a live handle, `xi` must point to `xi_len` doubles and `out`
/// to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ho_solve(
    sys: *const HoSystem,
    xi: *const f64,
    xi_len: usize,
    horizon: f64,
    grid: usize,
    method: i32,
    p: f64,
    out: *mut *mut HoSolution,
) -> HoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let method = HoMethod::from_raw(method)
            .ok_or_else(|| (HoStatus::InvalidArgument, format!("unknown method {method}")))?;
        let sys = system_ref(sys)?;
        let xi = slice(xi, xi_len, "xi")?;
        let problem = transcribe(sys, xi, horizon, grid).map_err(lib)?;
        let result = match method {
            HoMethod::Handsoff => solver::solve_max_handsoff(&problem),
            HoMethod::L1 => solver::solve_l1(&problem),
            HoMethod::Reweighted => {
                solver::solve_reweighted_lp(&problem, p, solver::DEFAULT_MAX_ITER, solver::DEFAULT_EPSILON)
            }
        }
        .map_err(lib)?;
        let cert = find_certificate(&problem, &result.control).map_err(lib)?;
        let (certified, max_violation) = match cert {
            Some(c) => (true, c.max_violation),
            None => (false, f64::NAN),
        };
        *out = Box::into_raw(Box::new(HoSolution { result, certified, max_violation }));
        Ok(())
    })
}

/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ho_solution_free(sol: *mut HoSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Number of control samples, or 0 for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ho_solution_len(sol: *const HoSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.result.control.n_intervals())
}

/// Copy the control samples into `buf`, which must hold `ho_solution_len` doubles.
///
/// # Safety
/// `sol` must be a live handle and `buf` must point to `buf_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ho_solution_values(sol: *const HoSolution, buf: *mut f64, buf_len: usize) -> HoStatus {
    guard(|| {
        let sol = sol.as_ref().ok_or_else(|| null("solution"))?;
        let values = sol.result.control.values();
        if buf_len < values.len() {
            return Err((HoStatus::BufferTooSmall, format!("buffer holds {buf_len}, need {}", values.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// Support measure of the control; NaN for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ho_solution_l0(sol: *const HoSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.result.control.l0_norm(DEFAULT_ZERO_TOL))
}

/// L1 norm of the control; NaN for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ho_solution_l1(sol: *const HoSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.result.control.l1_norm())
}

/// Samples strictly between the levels -1, 0, 1.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ho_solution_fractional_count(sol: *const HoSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.result.fractional_count)
}

/// 1 when a costate certificate was found for the control, 0 otherwise.
/// `max_violation` (optional) receives the certificate's worst violation.
///
/// # Safety
/// `sol` must be null or a live handle; `max_violation` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ho_solution_certified(sol: *const HoSolution, max_violation: *mut f64) -> i32 {
    let Some(sol) = sol.as_ref() else { return 0 };
    if let Some(out) = max_violation.as_mut() {
        *out = sol.max_violation;
    }
    i32::from(sol.certified)
}

/// Minimum support `V(ξ)`; `HO_STATUS_NOT_REACHABLE` when `ξ` cannot be steered to 0.
///
/// # Safety
/// `sys` must be a live handle, `xi` must point to `xi_len` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn ho_value(
    sys: *const HoSystem,
    xi: *const f64,
    xi_len: usize,
    horizon: f64,
    grid: usize,
    out: *mut f64,
) -> HoStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let sys = system_ref(sys)?;
        let xi = slice(xi, xi_len, "xi")?;
        *out = solver::value(&transcribe(sys, xi, horizon, grid).map_err(lib)?).map_err(lib)?;
        Ok(())
    })
}

/// Writes 1 to `out` if `ξ` is reachable on the grid, 0 otherwise.
///
/// # Safety
/// `sys` must be a live handle, `xi` must point to `xi_len` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn ho_is_reachable(
    sys: *const HoSystem,
    xi: *const f64,
    xi_len: usize,
    horizon: f64,
    grid: usize,
    out: *mut i32,
) -> HoStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let sys = system_ref(sys)?;
        let xi = slice(xi, xi_len, "xi")?;
        *out = i32::from(solver::is_reachable(sys, xi, horizon, grid).map_err(lib)?);
        Ok(())
    })
}
