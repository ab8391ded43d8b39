//! C ABI over `dh-core`.
//!
//! Objects cross the boundary as opaque pointers created by `*_from_json` or
//! by a computation, and released with the matching `*_free`. Every fallible
//! call returns a [`DhStatus`]; on failure, [`dh_last_error`] describes it.
//! Rationals travel as "p/q" strings owned by the library and released with
//! [`dh_string_free`].

use dh_core::lattice::Direction;
use dh_core::orbifold::{build_dh, closure_check, OrbifoldError, S1FixedPointData};
use dh_core::polytope::{delzant_to_s1data, slice_density, Polytope, PolytopeError};
use dh_core::rational::{format_rational, parse_rational};
use dh_core::PLDensity;
use num::Zero;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or a value rejected by validation.
    InvalidInput = 3,
    /// Fixed-point data that violates localization or realizability.
    Inconsistent = 4,
    Panic = 5,
}

/// Piecewise-linear density.
pub struct DhDensity(PLDensity);

/// Fixed-point data of a circle action.
pub struct DhFixedPointData(S1FixedPointData);

/// Convex lattice polytope.
pub struct DhPolytope(Polytope);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(DhStatus, String);

impl From<PolytopeError> for Failure {
    fn from(e: PolytopeError) -> Self {
        match e {
            PolytopeError::Orbifold(o) => o.into(),
            e => Failure(DhStatus::InvalidInput, e.to_string()),
        }
    }
}

impl From<OrbifoldError> for Failure {
    fn from(e: OrbifoldError) -> Self {
        let status = match e {
            OrbifoldError::SlopeMismatch { .. }
            | OrbifoldError::NegativeDensity { .. }
            | OrbifoldError::NotClosed { .. } => DhStatus::Inconsistent,
            _ => DhStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DhStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DhStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DhStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DhStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn obj<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(std::ptr::null_mut())
}

fn parse_json<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, Failure> {
    serde_json::from_str(s).map_err(|e| Failure(DhStatus::InvalidInput, e.to_string()))
}

unsafe fn direction(coords: *const i64, len: usize) -> Result<Direction, Failure> {
    if coords.is_null() {
        return Err(null("direction"));
    }
    let v = std::slice::from_raw_parts(coords, len).to_vec();
    Direction::new(v).map_err(|e| Failure(DhStatus::InvalidInput, e.to_string()))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn dh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_fixed_point_data_from_json(
    json: *const c_char,
    out: *mut *mut DhFixedPointData,
) -> DhStatus {
    guard(|| {
        let data: S1FixedPointData = parse_json(text(json, "json")?)?;
        put(out, Box::into_raw(Box::new(DhFixedPointData(data))))
    })
}

/// # Safety
/// `p` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn dh_fixed_point_data_free(p: *mut DhFixedPointData) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_polytope_from_json(json: *const c_char, out: *mut *mut DhPolytope) -> DhStatus {
    guard(|| {
        let p: Polytope = parse_json(text(json, "json")?)?;
        put(out, Box::into_raw(Box::new(DhPolytope(p))))
    })
}

/// # Safety
/// `p` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn dh_polytope_free(p: *mut DhPolytope) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_density_from_json(json: *const c_char, out: *mut *mut DhDensity) -> DhStatus {
    guard(|| {
        let f: PLDensity = parse_json(text(json, "json")?)?;
        put(out, Box::into_raw(Box::new(DhDensity(f))))
    })
}

/// # Safety
/// `p` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn dh_density_free(p: *mut DhDensity) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Density of fixed-point data. Fails with `Inconsistent` when the data
/// does not close up.
///
/// # Safety
/// `data` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_build_density(data: *const DhFixedPointData, out: *mut *mut DhDensity) -> DhStatus {
    guard(|| {
        let data = &obj(data, "data")?.0;
        let residual = closure_check(data)?;
        if !residual.is_zero() {
            let msg = format!("localization closure violated: residual {}", format_rational(&residual));
            return Err(Failure(DhStatus::Inconsistent, msg));
        }
        let f = build_dh(data)?;
        put(out, Box::into_raw(Box::new(DhDensity(f))))
    })
}

/// Telescoped value at the top level minus the declared one, as "p/q".
///
/// # Safety
/// `data` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_closure_residual(data: *const DhFixedPointData, out: *mut *mut c_char) -> DhStatus {
    guard(|| {
        let r = match closure_check(&obj(data, "data")?.0) {
            Ok(r) => format_rational(&r),
            Err(OrbifoldError::SlopeMismatch { residual, .. }) => residual,
            Err(e) => return Err(e.into()),
        };
        put(out, owned_string(r))
    })
}

/// Push-forward of Lebesgue measure along an integer direction.
///
/// # Safety
/// `poly` must be a live handle; `coords` must point to `len` integers;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_slice_density(
    poly: *const DhPolytope,
    coords: *const i64,
    len: usize,
    out: *mut *mut DhDensity,
) -> DhStatus {
    guard(|| {
        let f = slice_density(&obj(poly, "polytope")?.0, &direction(coords, len)?)?;
        put(out, Box::into_raw(Box::new(DhDensity(f))))
    })
}

/// Compares the polygon slice with the density rebuilt from its fixed
/// points. `equal` is false when the fixed-point route fails.
///
/// # Safety
/// `poly` must be a live handle; `coords` must point to `len` integers;
/// `equal` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_crossval(
    poly: *const DhPolytope,
    coords: *const i64,
    len: usize,
    equal: *mut bool,
) -> DhStatus {
    guard(|| {
        let p = &obj(poly, "polytope")?.0;
        let x = direction(coords, len)?;
        let toric = slice_density(p, &x)?;
        let data = delzant_to_s1data(p, &x)?;
        put(equal, build_dh(&data).is_ok_and(|g| g == toric))
    })
}

/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_density_is_log_concave(f: *const DhDensity, out: *mut bool) -> DhStatus {
    guard(|| put(out, obj(f, "density")?.0.is_log_concave().is_log_concave))
}

/// Evaluates at a "p/q" point; the result is a "p/q" string.
///
/// # Safety
/// `f` must be a live handle; `t` a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dh_density_evaluate(
    f: *const DhDensity,
    t: *const c_char,
    out: *mut *mut c_char,
) -> DhStatus {
    guard(|| {
        let f = &obj(f, "density")?.0;
        let t = parse_rational(text(t, "point")?).map_err(|e| Failure(DhStatus::InvalidInput, e.to_string()))?;
        put(out, owned_string(format_rational(&f.evaluate(&t))))
    })
}

/// Canonical JSON form of the density.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_density_to_json(f: *const DhDensity, out: *mut *mut c_char) -> DhStatus {
    guard(|| {
        let json = serde_json::to_string(&obj(f, "density")?.0.canonical()).expect("density serializes");
        put(out, owned_string(json))
    })
}
