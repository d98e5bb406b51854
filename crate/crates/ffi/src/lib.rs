//! C ABI over `padic-fg`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`PfgStatus`]; on failure [`pfg_last_error`] describes the cause for the
//! calling thread. Strings returned through `out` parameters are
//! NUL-terminated UTF-8 and must be released with [`pfg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_bigint::BigInt;
use padic_fg::cli::{execute, parse};
use padic_fg::counterexample::{cex_build, cex_verify, internal_precision, CounterexampleState};
use padic_fg::formal_group::FormalGroupLaw;
use padic_fg::padic::scalar::check_prime;
use padic_fg::padic::PadicScalar;
use padic_fg::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PfgStatus {
    Ok = 0,
    /// Malformed arguments or unsupported parameters.
    InvalidInput = 1,
    /// A certified computation did not reach the asserted property.
    CheckFailed = 2,
    /// A required pointer argument was null.
    NullPointer = 3,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 4,
    /// The library panicked; the handle arguments are left untouched.
    Internal = 5,
}

/// A p-adic number with its certified absolute precision.
pub struct PfgScalar(PadicScalar);

/// A counterexample construction run.
pub struct PfgCounterexample(CounterexampleState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: PfgStatus, msg: impl Into<String>) -> PfgStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> PfgStatus {
    let status = if e.is_check_failure() { PfgStatus::CheckFailed } else { PfgStatus::InvalidInput };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> PfgStatus) -> PfgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PfgStatus::Internal, msg)
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, PfgStatus> {
    if s.is_null() {
        return Err(fail(PfgStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|e| fail(PfgStatus::InvalidUtf8, e.to_string()))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> PfgStatus {
    if out.is_null() {
        return fail(PfgStatus::NullPointer, "null output pointer");
    }
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            PfgStatus::Ok
        }
        Err(e) => fail(PfgStatus::Internal, e.to_string()),
    }
}

unsafe fn write_handle<T>(out: *mut *mut T, v: T) -> PfgStatus {
    if out.is_null() {
        return fail(PfgStatus::NullPointer, "null output pointer");
    }
    *out = Box::into_raw(Box::new(v));
    PfgStatus::Ok
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message for the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn pfg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pfg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pfg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses the decimal integer `value` as an element of `Z_p` known modulo `p^prec`.
///
/// # Safety
/// `value` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfg_scalar_new(p: u64, value: *const c_char, prec: i64, out: *mut *mut PfgScalar) -> PfgStatus {
    guard(|| {
        let text = try_ffi!(str_arg(value));
        if let Err(e) = check_prime(p) {
            return from_error(e);
        }
        if prec < 1 {
            return fail(PfgStatus::InvalidInput, format!("precision {prec} must be positive"));
        }
        let n: BigInt = match text.trim().parse() {
            Ok(n) => n,
            Err(e) => return fail(PfgStatus::InvalidInput, format!("integer {text}: {e}")),
        };
        write_handle(out, PfgScalar(PadicScalar::from_bigint(p, &n, prec)))
    })
}

/// Releases a scalar. Null is ignored.
///
/// # Safety
/// `x` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pfg_scalar_free(x: *mut PfgScalar) {
    if !x.is_null() {
        drop(Box::from_raw(x));
    }
}

/// Arithmetic operations for [`pfg_scalar_op`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub enum PfgOp {
    Add = 0,
    Sub = 1,
    Mul = 2,
    Div = 3,
}

/// `*out = a op b` with precision propagated from both operands.
///
/// # Safety
/// `a` and `b` must be live scalar handles and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfg_scalar_op(op: PfgOp, a: *const PfgScalar, b: *const PfgScalar, out: *mut *mut PfgScalar) -> PfgStatus {
    guard(|| {
        if a.is_null() || b.is_null() {
            return fail(PfgStatus::NullPointer, "null scalar");
        }
        let (x, y) = (&(*a).0, &(*b).0);
        if x.prime() != y.prime() {
            return from_error(Error::PrimeMismatch(x.prime(), y.prime()));
        }
        let r = match op {
            PfgOp::Add => x + y,
            PfgOp::Sub => x - y,
            PfgOp::Mul => x * y,
            PfgOp::Div => match x.checked_div(y) {
                Ok(r) => r,
                Err(e) => return from_error(e),
            },
        };
        write_handle(out, PfgScalar(r))
    })
}

/// Writes `v_p(x)` to `out_v` and `false` to `out_zero`, or `true` to
/// `out_zero` when `x` vanishes to its precision (then `out_v` holds the precision).
///
/// # Safety
/// `x` must be a live scalar handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfg_scalar_valuation(x: *const PfgScalar, out_v: *mut i64, out_zero: *mut bool) -> PfgStatus {
    guard(|| {
        if x.is_null() || out_v.is_null() || out_zero.is_null() {
            return fail(PfgStatus::NullPointer, "null argument");
        }
        let s = &(*x).0;
        match s.valuation() {
            Some(v) => {
                *out_v = v;
                *out_zero = false;
            }
            None => {
                *out_v = s.precision();
                *out_zero = true;
            }
        }
        PfgStatus::Ok
    })
}

/// Certified absolute precision of `x`, or -1 for a null handle.
///
/// # Safety
/// `x` must be null or a live scalar handle.
#[no_mangle]
pub unsafe extern "C" fn pfg_scalar_precision(x: *const PfgScalar) -> i64 {
    if x.is_null() {
        return -1;
    }
    (*x).0.precision()
}

/// `x` as the JSON record `{"v", "unit", "prec"}`.
///
/// # Safety
/// `x` must be a live scalar handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfg_scalar_to_json(x: *const PfgScalar, out: *mut *mut c_char) -> PfgStatus {
    guard(|| {
        if x.is_null() {
            return fail(PfgStatus::NullPointer, "null scalar");
        }
        write_string(out, serde_json::to_string(&(*x).0.to_record()).unwrap_or_default())
    })
}

/// Runs the construction on `G_m` over `Z_p` with `alpha_1 = alpha_2 = alpha`
/// (a decimal integer of positive valuation) for `stages` stages at output
/// precision `n_out`.
///
/// # Safety
/// `alpha` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfg_cex_build(
    p: u64,
    alpha: *const c_char,
    n_out: i64,
    stages: u32,
    out: *mut *mut PfgCounterexample,
) -> PfgStatus {
    guard(|| {
        let text = try_ffi!(str_arg(alpha));
        if let Err(e) = check_prime(p) {
            return from_error(e);
        }
        let a: BigInt = match text.trim().parse() {
            Ok(n) => n,
            Err(e) => return fail(PfgStatus::InvalidInput, format!("integer {text}: {e}")),
        };
        if n_out < 1 || !(1..=10).contains(&stages) {
            return fail(PfgStatus::InvalidInput, format!("need n_out >= 1 and stages in 1..=10, got {n_out}, {stages}"));
        }
        let v = padic_fg::padic::scalar::vp_bigint(p, &a);
        let work = internal_precision(v, n_out, stages) + 16;
        let alpha = PadicScalar::from_bigint(p, &a, work);
        let g = FormalGroupLaw::multiplicative(p, 16, work);
        match cex_build(&g, &alpha, &alpha, n_out, stages) {
            Ok(s) => write_handle(out, PfgCounterexample(s)),
            Err(e) => from_error(e),
        }
    })
}

/// Releases a construction handle. Null is ignored.
///
/// # Safety
/// `h` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pfg_cex_free(h: *mut PfgCounterexample) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of completed stages, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pfg_cex_stage(h: *const PfgCounterexample) -> u32 {
    if h.is_null() {
        return 0;
    }
    (*h).0.stage()
}

/// Full state dump as JSON, readable by `padic-fg cex verify`.
///
/// # Safety
/// `h` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfg_cex_to_json(h: *const PfgCounterexample, out: *mut *mut c_char) -> PfgStatus {
    guard(|| {
        if h.is_null() {
            return fail(PfgStatus::NullPointer, "null handle");
        }
        write_string(out, serde_json::to_string(&(*h).0.to_json()).unwrap_or_default())
    })
}

/// Re-verifies every interpolation condition to precision `n_out` and writes
/// the report as JSON. Returns `PFG_STATUS_CHECK_FAILED` when a residual is
/// too large; `out` is then left untouched.
///
/// # Safety
/// `h` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfg_cex_verify(h: *const PfgCounterexample, n_out: i64, out: *mut *mut c_char) -> PfgStatus {
    guard(|| {
        if h.is_null() {
            return fail(PfgStatus::NullPointer, "null handle");
        }
        match cex_verify(&(*h).0, n_out) {
            Ok(r) => write_string(out, serde_json::to_string(&r).unwrap_or_default()),
            Err(e) => from_error(e),
        }
    })
}

/// Runs one command-line invocation (without the program name), e.g.
/// `{"newton", "polygon", "--p", "3", "--alpha-val", "1"}`, and writes its
/// JSON document to `out`. A document whose checks failed is still written
/// and the call returns `PFG_STATUS_CHECK_FAILED`.
///
/// # Safety
/// `argv` must point to `argc` NUL-terminated strings and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn pfg_run_json(argc: usize, argv: *const *const c_char, out: *mut *mut c_char) -> PfgStatus {
    guard(|| {
        if argv.is_null() && argc > 0 {
            return fail(PfgStatus::NullPointer, "null argv");
        }
        let mut args = vec!["padic-fg".to_string()];
        for i in 0..argc {
            args.push(try_ffi!(str_arg(*argv.add(i))).to_string());
        }
        run_args(&args, out)
    })
}

/// Newton polygon of `[p](X) - alpha` on `G_m` for `v(alpha) = alpha_val`
/// (an exact rational such as `"3/2"`), iterated `steps` times.
///
/// # Safety
/// `alpha_val` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pfg_newton_json(p: u64, alpha_val: *const c_char, steps: u32, out: *mut *mut c_char) -> PfgStatus {
    guard(|| {
        let v = try_ffi!(str_arg(alpha_val));
        let args: Vec<String> = ["padic-fg", "newton", "polygon", "--p", &p.to_string(), "--alpha-val", v, "--steps", &steps.to_string()]
            .iter()
            .map(|s| s.to_string())
            .collect();
        run_args(&args, out)
    })
}

unsafe fn run_args(args: &[String], out: *mut *mut c_char) -> PfgStatus {
    let cli = match parse(args) {
        Ok(c) => c,
        Err(e) => return from_error(e),
    };
    match execute(cli) {
        Ok((doc, _, failures, _)) => {
            let status = write_string(out, serde_json::to_string(&doc).unwrap_or_default());
            if status != PfgStatus::Ok {
                return status;
            }
            if failures.is_empty() {
                PfgStatus::Ok
            } else {
                fail(PfgStatus::CheckFailed, failures.join("; "))
            }
        }
        Err(e) => from_error(e),
    }
}
