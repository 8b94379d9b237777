//! C interface to `alf-instantons`.
//!
//! Profiles and parameter sets are opaque handles owned by the caller and
//! released with their `_free` function. Every fallible call returns an
//! [`AlfStatus`]; on failure the message is available from
//! [`alf_last_error`] until the next failing call on the same thread.
//! Strings returned by the library are released with [`alf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use alf_instantons::chen_teo::ChenTeoParams;
use alf_instantons::curvature::default_step;
use alf_instantons::metric::{eval_axis_fields, eval_fields, ricci_residual};
use alf_instantons::potential::eval_u;
use alf_instantons::profile::{Preset, Profile};
use alf_instantons::regularity::{classify, nut_charge};
use alf_instantons::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidProfile = 4,
    Domain = 5,
    Regularity = 6,
    Panic = 99,
}

/// A validated profile.
pub struct AlfProfile(Profile);

/// A three-turning-point parameter set `(p, q, a, b)`.
pub struct AlfParams(ChenTeoParams);

/// Fields `V`, `F`, `e^{2nu}` at one point; `v` is `+inf` on the axis over
/// a zero-slope interval.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AlfFields {
    pub v: f64,
    pub f: f64,
    pub e2nu: f64,
    /// Nonzero when the value is a numerical axis limit.
    pub extrapolated: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> AlfStatus {
    use Error::*;
    match e {
        NonPositiveA(_)
        | NegativeA(_)
        | CoefficientsDontSumToOne(_)
        | NonMonotoneTurningPoints
        | NonPositiveCoefficient { .. }
        | NoTurningPoints
        | UnknownPreset(_)
        | ParameterOutOfRange(_)
        | WrongTurningPointCount(_) => AlfStatus::InvalidProfile,
        AngleNonPositive { .. }
        | AngleCountMismatch { .. }
        | DegeneratePair(..)
        | DegenerateDenominator
        | NoPositiveAngleSolution(_)
        | NonIntegerNut(_)
        | AdjacentSlopesBothZero(_) => AlfStatus::Regularity,
        _ => AlfStatus::Domain,
    }
}

struct Failure(AlfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(AlfStatus::Parse, e.to_string())
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AlfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AlfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AlfStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(AlfStatus::NullPointer, "null pointer argument".into())
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(AlfStatus::InvalidUtf8, "string is not valid UTF-8".into()))
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

/// Message of the last failing call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn alf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn alf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a profile from JSON `{"A": .., "turns": [{"z": .., "a": ..}, ..]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn alf_profile_from_json(
    json: *const c_char,
    out: *mut *mut AlfProfile,
) -> AlfStatus {
    guard(|| {
        let p = Profile::from_json(str_arg(json)?)?;
        write(out, Box::into_raw(Box::new(AlfProfile(p))))
    })
}

/// Builds a named preset. `keys` and `values` hold `len` named parameters
/// (`m`, `n`, `a`, `b`, `p`, `A`); they may be null when `len` is 0.
///
/// # Safety
/// `name` and each `keys[i]` must be NUL-terminated strings, `values` must
/// hold `len` doubles, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn alf_profile_from_preset(
    name: *const c_char,
    keys: *const *const c_char,
    values: *const f64,
    len: usize,
    out: *mut *mut AlfProfile,
) -> AlfStatus {
    guard(|| {
        let name = str_arg(name)?;
        let mut params = Vec::with_capacity(len);
        if len > 0 {
            if keys.is_null() || values.is_null() {
                return Err(null());
            }
            for i in 0..len {
                params.push((str_arg(*keys.add(i))?, *values.add(i)));
            }
        }
        let preset = Preset::from_name(name, |k| {
            params.iter().find(|(key, _)| *key == k).map(|(_, v)| *v)
        })?;
        let p = preset.build()?.into_alf()?;
        write(out, Box::into_raw(Box::new(AlfProfile(p))))
    })
}

/// # Safety
/// `profile` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn alf_profile_free(profile: *mut AlfProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Writes the profile as JSON into a new string.
///
/// # Safety
/// `profile` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn alf_profile_to_json(
    profile: *const AlfProfile,
    out: *mut *mut c_char,
) -> AlfStatus {
    guard(|| {
        let text = serde_json::to_string(&ref_arg(profile)?.0)?;
        write(out, into_c_string(text))
    })
}

/// Number of turning points.
///
/// # Safety
/// `profile` must be a live handle or null (giving 0).
#[no_mangle]
pub unsafe extern "C" fn alf_profile_turn_count(profile: *const AlfProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.0.r())
}

/// `f(z)`.
///
/// # Safety
/// `profile` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn alf_profile_eval(
    profile: *const AlfProfile,
    z: f64,
    out: *mut f64,
) -> AlfStatus {
    guard(|| write(out, ref_arg(profile)?.0.eval(z)))
}

/// The harmonic potential `U` at `rho > 0`.
///
/// # Safety
/// `profile` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn alf_potential_eval(
    profile: *const AlfProfile,
    rho: f64,
    z: f64,
    out: *mut f64,
) -> AlfStatus {
    guard(|| write(out, eval_u(&ref_arg(profile)?.0, rho, z)?))
}

/// `V`, `F`, `e^{2nu}`; `rho = 0` evaluates the axis values.
///
/// # Safety
/// `profile` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn alf_fields_eval(
    profile: *const AlfProfile,
    rho: f64,
    z: f64,
    out: *mut AlfFields,
) -> AlfStatus {
    guard(|| {
        let p = &ref_arg(profile)?.0;
        let s = if rho == 0.0 {
            eval_axis_fields(p, z)?
        } else {
            eval_fields(p, rho, z)?
        };
        write(
            out,
            AlfFields {
                v: s.v,
                f: s.f,
                e2nu: s.e2nu,
                extrapolated: s.extrapolated.into(),
            },
        )
    })
}

/// Finite-difference Ricci residual of the metric; `h <= 0` selects the
/// default step.
///
/// # Safety
/// `profile` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn alf_ricci_residual(
    profile: *const AlfProfile,
    rho: f64,
    z: f64,
    h: f64,
    out: *mut f64,
) -> AlfStatus {
    guard(|| {
        let h = if h > 0.0 { h } else { default_step(rho) };
        write(out, ricci_residual(&ref_arg(profile)?.0, rho, z, h)?)
    })
}

/// Parameter set from `(p, q, a, b)`; needs `p q != 0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn alf_params_new(
    p: f64,
    q: f64,
    a: f64,
    b: f64,
    out: *mut *mut AlfParams,
) -> AlfStatus {
    guard(|| {
        let c = ChenTeoParams::from_pqab(p, q, a, b)?;
        write(out, Box::into_raw(Box::new(AlfParams(c))))
    })
}

/// # Safety
/// `params` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn alf_params_free(params: *mut AlfParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// The profile of a parameter set; fails when `A <= 0`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn alf_params_profile(
    params: *const AlfParams,
    out: *mut *mut AlfProfile,
) -> AlfStatus {
    guard(|| {
        let p = ref_arg(params)?.0.to_profile()?;
        write(out, Box::into_raw(Box::new(AlfProfile(p))))
    })
}

/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn alf_nut_charge(params: *const AlfParams, out: *mut f64) -> AlfStatus {
    guard(|| write(out, nut_charge(&ref_arg(params)?.0)?))
}

/// Regularity report as JSON; `tol` is the integer tolerance for the NUT
/// charge (`<= 0` selects `1e-9`). `regular` is set to 1 or 0.
///
/// # Safety
/// `params` must be a live handle; `json` and `regular` must be writable
/// or null.
#[no_mangle]
pub unsafe extern "C" fn alf_classify(
    params: *const AlfParams,
    tol: f64,
    regular: *mut i32,
    json: *mut *mut c_char,
) -> AlfStatus {
    guard(|| {
        let tol = if tol > 0.0 { tol } else { 1e-9 };
        let rep = classify(&ref_arg(params)?.0, tol)?;
        if !regular.is_null() {
            regular.write(rep.regular.into());
        }
        if !json.is_null() {
            json.write(into_c_string(serde_json::to_string(&rep)?));
        }
        Ok(())
    })
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn alf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
