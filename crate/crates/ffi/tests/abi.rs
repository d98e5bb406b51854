use std::ffi::{c_char, CStr, CString};
use std::ptr;

use padic_fg_ffi::*;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { pfg_string_free(s) };
    out
}

fn last_error() -> String {
    let e = pfg_last_error();
    assert!(!e.is_null());
    unsafe { CStr::from_ptr(e) }.to_str().unwrap().to_string()
}

fn scalar(p: u64, v: &str, prec: i64) -> *mut PfgScalar {
    let s = CString::new(v).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { pfg_scalar_new(p, s.as_ptr(), prec, &mut out) }, PfgStatus::Ok);
    out
}

#[test]
fn scalar_arithmetic() {
    let a = scalar(3, "18", 20);
    let b = scalar(3, "6", 10);
    let mut prod = ptr::null_mut();
    assert_eq!(unsafe { pfg_scalar_op(PfgOp::Mul, a, b, &mut prod) }, PfgStatus::Ok);
    let (mut v, mut zero) = (0i64, true);
    assert_eq!(unsafe { pfg_scalar_valuation(prod, &mut v, &mut zero) }, PfgStatus::Ok);
    assert_eq!((v, zero), (3, false));
    assert_eq!(unsafe { pfg_scalar_precision(prod) }, 12);
    let mut q = ptr::null_mut();
    assert_eq!(unsafe { pfg_scalar_op(PfgOp::Div, a, b, &mut q) }, PfgStatus::Ok);
    let mut js = ptr::null_mut();
    assert_eq!(unsafe { pfg_scalar_to_json(q, &mut js) }, PfgStatus::Ok);
    let rec: serde_json::Value = serde_json::from_str(&take(js)).unwrap();
    assert_eq!(rec["v"], 1);
    assert_eq!(rec["unit"], "1");

    let z = scalar(3, "0", 5);
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { pfg_scalar_op(PfgOp::Div, a, z, &mut bad) }, PfgStatus::InvalidInput);
    assert!(bad.is_null());
    assert!(last_error().contains("zero to precision"));
    let five = scalar(5, "1", 5);
    assert_eq!(unsafe { pfg_scalar_op(PfgOp::Add, a, five, &mut bad) }, PfgStatus::InvalidInput);
    for h in [a, b, prod, q, z, five] {
        unsafe { pfg_scalar_free(h) };
    }
}

#[test]
fn bad_arguments_are_reported() {
    let mut out = ptr::null_mut();
    let s = CString::new("12").unwrap();
    assert_eq!(unsafe { pfg_scalar_new(4, s.as_ptr(), 10, &mut out) }, PfgStatus::InvalidInput);
    assert!(last_error().contains("odd prime"));
    assert_eq!(unsafe { pfg_scalar_new(3, ptr::null(), 10, &mut out) }, PfgStatus::NullPointer);
    let junk = CString::new("1x").unwrap();
    assert_eq!(unsafe { pfg_scalar_new(3, junk.as_ptr(), 10, &mut out) }, PfgStatus::InvalidInput);
    assert_eq!(unsafe { pfg_scalar_new(3, s.as_ptr(), 10, ptr::null_mut()) }, PfgStatus::NullPointer);
    assert!(out.is_null());
    unsafe { pfg_scalar_free(ptr::null_mut()) };
    unsafe { pfg_string_free(ptr::null_mut()) };
    assert_eq!(unsafe { CStr::from_ptr(pfg_version()) }.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn counterexample_handle() {
    let alpha = CString::new("3").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { pfg_cex_build(3, alpha.as_ptr(), 60, 6, &mut h) }, PfgStatus::Ok);
    assert_eq!(unsafe { pfg_cex_stage(h) }, 6);
    let mut js = ptr::null_mut();
    assert_eq!(unsafe { pfg_cex_verify(h, 60, &mut js) }, PfgStatus::Ok);
    let report: serde_json::Value = serde_json::from_str(&take(js)).unwrap();
    assert_eq!(report["all_paths_agree"], true);
    assert_eq!(report["residuals"].as_array().unwrap().len(), 6);
    let mut dump = ptr::null_mut();
    assert_eq!(unsafe { pfg_cex_to_json(h, &mut dump) }, PfgStatus::Ok);
    let state: serde_json::Value = serde_json::from_str(&take(dump)).unwrap();
    assert_eq!(state["stage"], 6);
    unsafe { pfg_cex_free(h) };

    let unit = CString::new("2").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { pfg_cex_build(3, unit.as_ptr(), 60, 3, &mut h) }, PfgStatus::InvalidInput);
    assert!(h.is_null());
    assert_eq!(unsafe { pfg_cex_stage(ptr::null()) }, 0);
}

#[test]
fn command_runner() {
    let v = CString::new("1").unwrap();
    let mut js = ptr::null_mut();
    assert_eq!(unsafe { pfg_newton_json(3, v.as_ptr(), 1, &mut js) }, PfgStatus::Ok);
    assert!(take(js).contains("\"1/3\""));

    let v = CString::new("6").unwrap();
    let mut js = ptr::null_mut();
    assert_eq!(unsafe { pfg_newton_json(3, v.as_ptr(), 1, &mut js) }, PfgStatus::CheckFailed);
    let doc: serde_json::Value = serde_json::from_str(&take(js)).unwrap();
    assert_eq!(doc["passed"], false);

    let args: Vec<CString> = ["subtorus", "check", "--curve", "diagonal"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs: Vec<*const c_char> = args.iter().map(|s| s.as_ptr()).collect();
    let mut js = ptr::null_mut();
    assert_eq!(unsafe { pfg_run_json(ptrs.len(), ptrs.as_ptr(), &mut js) }, PfgStatus::Ok);
    let doc: serde_json::Value = serde_json::from_str(&take(js)).unwrap();
    assert_eq!(doc["result"]["verdict"], "special");

    let args: Vec<CString> = ["frobnicate"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs: Vec<*const c_char> = args.iter().map(|s| s.as_ptr()).collect();
    let mut js = ptr::null_mut();
    assert_eq!(unsafe { pfg_run_json(ptrs.len(), ptrs.as_ptr(), &mut js) }, PfgStatus::InvalidInput);
    assert!(js.is_null());
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/padic_fg.h");
    let src = include_str!("../src/lib.rs");
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 14);
    for name in exports {
        let declared = [" ", "*"].iter().any(|pre| header.contains(&format!("{pre}{name}(")));
        assert!(declared, "{name} missing from header");
    }
    for t in ["typedef struct PfgScalar PfgScalar;", "typedef struct PfgCounterexample PfgCounterexample;", "PFG_STATUS_CHECK_FAILED = 2"] {
        assert!(header.contains(t), "{t}");
    }
}
