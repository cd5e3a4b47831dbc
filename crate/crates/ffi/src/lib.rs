//! C ABI over the cclab library.
//!
//! Every function returns a [`CclabStatus`]; on failure the message is kept
//! per thread and can be read with [`cclab_last_error`]. Points and vectors
//! are passed in ambient coordinates with an explicit length, which must equal
//! [`cclab_manifold_ambient_dim`]. Handles are owned by the caller and released
//! with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cclab::cost::{cost_eval, Cost};
use cclab::crosscurv::cross_fd;
use cclab::manifold::{Manifold, ManifoldPoint, TangentVector};
use cclab::sphere::{neg_h_ddot, SphereConfig};
use cclab::suites::{run_suite, SuiteOptions};
use cclab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CclabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    CutLocus = 3,
    Singular = 4,
    NoConvergence = 5,
    Panic = 6,
}

/// Opaque manifold handle.
pub struct CclabManifold {
    inner: Manifold,
}

/// Opaque cost handle.
pub struct CclabCost {
    inner: Cost,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(CclabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Domain(_) | Error::Parse(_) => CclabStatus::InvalidArgument,
            Error::CutLocusProximity { .. } => CclabStatus::CutLocus,
            Error::SingularCost | Error::Degeneracy(_) | Error::NotNullable(_) => CclabStatus::Singular,
            Error::Convergence { .. } => CclabStatus::NoConvergence,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(CclabStatus::InvalidArgument, msg.into())
}

fn null(what: &str) -> Failure {
    Failure(CclabStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CclabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CclabStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_owned())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_owned());
            set_error(format!("internal panic: {msg}"));
            CclabStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn coords(m: &Manifold, p: *const f64, len: usize, what: &str) -> Result<nalgebra::DVector<f64>, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    if len != m.ambient_dim() {
        return Err(invalid(format!("{what}: expected {} coordinates, got {len}", m.ambient_dim())));
    }
    Ok(nalgebra::DVector::from_column_slice(std::slice::from_raw_parts(p, len)))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn cclab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a manifold descriptor such as `"S2"`, `"CP1"` or `"S2xR1"`.
///
/// # Safety
/// `name` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cclab_manifold_new(name: *const c_char, out: *mut *mut CclabManifold) -> CclabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let m: Manifold = str_arg(name, "name")?.parse()?;
        *out = Box::into_raw(Box::new(CclabManifold { inner: m }));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from [`cclab_manifold_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cclab_manifold_free(m: *mut CclabManifold) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of ambient coordinates of a point.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cclab_manifold_ambient_dim(m: *const CclabManifold, out: *mut usize) -> CclabStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(m, "manifold")?.inner.ambient_dim();
        Ok(())
    })
}

/// Builds a cost on `m`: `"half-square"`, `"log"` or `"radial:<profile>"`.
///
/// # Safety
/// `m` must be a live handle, `spec` a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cclab_cost_new(m: *const CclabManifold, spec: *const c_char, out: *mut *mut CclabCost) -> CclabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let c = Cost::parse(&ref_arg(m, "manifold")?.inner, str_arg(spec, "spec")?)?;
        *out = Box::into_raw(Box::new(CclabCost { inner: c }));
        Ok(())
    })
}

/// # Safety
/// `c` must be null or a handle from [`cclab_cost_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cclab_cost_free(c: *mut CclabCost) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// `c(x, xbar)`.
///
/// # Safety
/// `c` must be a live handle; `x` and `xbar` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cclab_cost_eval(
    c: *const CclabCost,
    x: *const f64,
    xbar: *const f64,
    len: usize,
    out: *mut f64,
) -> CclabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = &ref_arg(c, "cost")?.inner;
        let m = c.manifold();
        let x = ManifoldPoint::new(m, coords(m, x, len, "x")?)?;
        let xbar = ManifoldPoint::new(m, coords(m, xbar, len, "xbar")?)?;
        *out = cost_eval(c, &x, &xbar)?;
        Ok(())
    })
}

/// Cross-curvature of `c` at `(x, xbar)` along `p` (tangent at `x`) and
/// `pbar` (tangent at `xbar`), with the pairing `h` of the two vectors.
/// `h` may be null.
///
/// # Safety
/// `c` must be a live handle; the four arrays must hold `len` doubles each.
#[no_mangle]
pub unsafe extern "C" fn cclab_cross(
    c: *const CclabCost,
    x: *const f64,
    xbar: *const f64,
    p: *const f64,
    pbar: *const f64,
    len: usize,
    cross: *mut f64,
    h: *mut f64,
) -> CclabStatus {
    guard(|| {
        let cross = out_arg(cross, "cross")?;
        let c = &ref_arg(c, "cost")?.inner;
        let m = c.manifold();
        let x = ManifoldPoint::new(m, coords(m, x, len, "x")?)?;
        let xbar = ManifoldPoint::new(m, coords(m, xbar, len, "xbar")?)?;
        let p = TangentVector::new(&x, coords(m, p, len, "p")?)?;
        let pbar = TangentVector::new(&xbar, coords(m, pbar, len, "pbar")?)?;
        let s = cross_fd(c, &x, &xbar, &p, &pbar)?;
        *cross = s.cross_value;
        if let Some(h) = h.as_mut() {
            *h = s.h_value;
        }
        Ok(())
    })
}

/// Closed-form `-H''` on the unit sphere for unit `q` and unit in-plane `w1`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cclab_sphere_neg_h_ddot(rho: f64, theta: f64, psi: f64, w_perp: f64, out: *mut f64) -> CclabStatus {
    guard(|| {
        *out_arg(out, "out")? = neg_h_ddot(&SphereConfig::new(rho, theta, psi, w_perp))?;
        Ok(())
    })
}

/// Runs a verification suite with default sizes (reduced if `quick` is
/// nonzero). `*pass` receives 1 if every claim passed, else 0. If `json` is
/// not null it receives the reports as a JSON array, to be released with
/// [`cclab_string_free`].
///
/// # Safety
/// `name` must be a valid C string and `pass` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cclab_run_suite(
    name: *const c_char,
    seed: u64,
    quick: c_int,
    pass: *mut c_int,
    json: *mut *mut c_char,
) -> CclabStatus {
    guard(|| {
        let pass = out_arg(pass, "pass")?;
        if let Some(j) = json.as_mut() {
            *j = ptr::null_mut();
        }
        let opts = SuiteOptions {
            seed,
            quick: quick != 0,
            ..SuiteOptions::default()
        };
        let out = run_suite(str_arg(name, "name")?, &opts)?;
        *pass = c_int::from(out.pass());
        if let Some(j) = json.as_mut() {
            let body = serde_json::to_string(&out.reports).map_err(|e| invalid(e.to_string()))?;
            *j = CString::new(body).map_err(|e| invalid(e.to_string()))?.into_raw();
        }
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cclab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
