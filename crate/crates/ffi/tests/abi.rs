use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use alf_instantons_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(alf_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn preset(name: &str, params: &[(&str, f64)]) -> *mut AlfProfile {
    let name = CString::new(name).unwrap();
    let keys: Vec<CString> = params
        .iter()
        .map(|(k, _)| CString::new(*k).unwrap())
        .collect();
    let key_ptrs: Vec<*const c_char> = keys.iter().map(|k| k.as_ptr()).collect();
    let values: Vec<f64> = params.iter().map(|(_, v)| *v).collect();
    let mut out = ptr::null_mut();
    let s = unsafe {
        alf_profile_from_preset(
            name.as_ptr(),
            key_ptrs.as_ptr(),
            values.as_ptr(),
            params.len(),
            &mut out,
        )
    };
    assert_eq!(s, AlfStatus::Ok, "{}", last_error());
    out
}

#[test]
fn profile_round_trip() {
    let json = CString::new(r#"{"A":1,"turns":[{"z":-1,"a":0.5},{"z":1,"a":0.5}]}"#).unwrap();
    let mut prof = ptr::null_mut();
    unsafe {
        assert_eq!(
            alf_profile_from_json(json.as_ptr(), &mut prof),
            AlfStatus::Ok
        );
        assert_eq!(alf_profile_turn_count(prof), 2);
        let mut f = 0.0;
        assert_eq!(alf_profile_eval(prof, 0.0, &mut f), AlfStatus::Ok);
        assert_eq!(f, 2.0);
        let mut text = ptr::null_mut();
        assert_eq!(alf_profile_to_json(prof, &mut text), AlfStatus::Ok);
        let s = CStr::from_ptr(text).to_str().unwrap().to_string();
        alf_string_free(text);
        assert!(s.contains("\"turns\""));
        alf_profile_free(prof);
    }
}

#[test]
fn invalid_inputs() {
    let bad = CString::new(r#"{"A":1,"turns":[{"z":-1,"a":0.3},{"z":1,"a":0.3}]}"#).unwrap();
    let garbage = CString::new("{").unwrap();
    let mut prof = ptr::null_mut();
    unsafe {
        assert_eq!(
            alf_profile_from_json(bad.as_ptr(), &mut prof),
            AlfStatus::Parse
        );
        assert!(prof.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(
            alf_profile_from_json(garbage.as_ptr(), &mut prof),
            AlfStatus::Parse
        );
        assert_eq!(
            alf_profile_from_json(ptr::null(), &mut prof),
            AlfStatus::NullPointer
        );
        assert_eq!(
            alf_profile_eval(ptr::null(), 0.0, &mut 0.0),
            AlfStatus::NullPointer
        );
        assert_eq!(alf_profile_turn_count(ptr::null()), 0);
        let bytes = [0xffu8, 0];
        assert_eq!(
            alf_profile_from_json(bytes.as_ptr().cast(), &mut prof),
            AlfStatus::InvalidUtf8
        );
        let name = CString::new("nope").unwrap();
        assert_eq!(
            alf_profile_from_preset(name.as_ptr(), ptr::null(), ptr::null(), 0, &mut prof),
            AlfStatus::InvalidProfile
        );
        alf_profile_free(ptr::null_mut());
        alf_params_free(ptr::null_mut());
        alf_string_free(ptr::null_mut());
    }
}

#[test]
fn fields_and_curvature() {
    let prof = preset("schwarzschild", &[("m", 1.0)]);
    unsafe {
        let mut fields = AlfFields::default();
        assert_eq!(alf_fields_eval(prof, 0.0, 0.3, &mut fields), AlfStatus::Ok);
        assert!(fields.v.is_infinite() && fields.extrapolated == 1);
        assert_eq!(alf_fields_eval(prof, 1.0, 0.3, &mut fields), AlfStatus::Ok);
        assert!(fields.v.is_finite() && fields.extrapolated == 0);
        let mut u = 0.0;
        assert_eq!(alf_potential_eval(prof, 1.0, 0.3, &mut u), AlfStatus::Ok);
        assert_eq!(
            alf_potential_eval(prof, 0.0, 0.3, &mut u),
            AlfStatus::Domain
        );
        let mut r = 1.0;
        assert_eq!(
            alf_ricci_residual(prof, 1.0, 0.3, 0.0, &mut r),
            AlfStatus::Ok
        );
        assert!(r < 1e-5, "{r}");
        alf_profile_free(prof);
    }
}

#[test]
fn classification() {
    let mut params = ptr::null_mut();
    unsafe {
        assert_eq!(
            alf_params_new(0.4, 0.6, 1.0 / 0.6, 2.5, &mut params),
            AlfStatus::Ok
        );
        let mut n = 1.0;
        assert_eq!(alf_nut_charge(params, &mut n), AlfStatus::Ok);
        assert!(n.abs() < 1e-12);
        let mut regular = 0;
        let mut json = ptr::null_mut();
        assert_eq!(
            alf_classify(params, 0.0, &mut regular, &mut json),
            AlfStatus::Ok
        );
        assert_eq!(regular, 1);
        let rep: serde_json::Value =
            serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        alf_string_free(json);
        assert_eq!(rep["topology"]["type"], "S1xS2");
        let mut prof = ptr::null_mut();
        assert_eq!(alf_params_profile(params, &mut prof), AlfStatus::Ok);
        assert_eq!(alf_profile_turn_count(prof), 3);
        alf_profile_free(prof);
        alf_params_free(params);

        assert_eq!(
            alf_params_new(0.3, 0.5, 2.0, 3.0, &mut params),
            AlfStatus::Ok
        );
        assert_eq!(
            alf_classify(params, 0.0, &mut regular, ptr::null_mut()),
            AlfStatus::Ok
        );
        assert_eq!(regular, 0);
        alf_params_free(params);

        assert_eq!(
            alf_params_new(0.0, 0.5, 2.0, 3.0, &mut params),
            AlfStatus::InvalidProfile
        );
    }
}

#[test]
fn errors_are_per_thread() {
    let garbage = CString::new("[").unwrap();
    unsafe { alf_profile_from_json(garbage.as_ptr(), &mut ptr::null_mut()) };
    assert!(!last_error().is_empty());
    std::thread::spawn(|| assert!(last_error().is_empty()))
        .join()
        .unwrap();
}

#[test]
fn version() {
    let v = unsafe { CStr::from_ptr(alf_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/alf_instantons.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "alf_profile_from_json",
        "alf_classify",
        "alf_string_free",
        "ALF_STATUS_PANIC",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(out) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .output()
    else {
        return;
    };
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
