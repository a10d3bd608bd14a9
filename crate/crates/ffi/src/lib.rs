//! C interface to the `verlinde` library.
//!
//! Queries and results are opaque heap handles. Every fallible call returns a
//! [`VerlindeStatus`]; the message for the most recent failure on the calling
//! thread is available from [`verlinde_last_error`]. Strings returned by
//! `*_json` functions are owned by the caller and released with
//! [`verlinde_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use verlinde::error::{QueryError, VerlindeError};
use verlinde::query::{self, ComputeOutput, Mode, QuerySpec};
use verlinde::verlinde::Admissibility;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerlindeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Inadmissible = 4,
    NonIntegral = 5,
    Overflow = 6,
    Failed = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerlindeMode {
    /// Pick from the group: quotient formula for nontrivial subgroups.
    Auto = 0,
    Sc = 1,
    Ns = 2,
    Conjclass = 3,
    Closed = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerlindeRule {
    Strict = 0,
    Weak = 1,
    Unchecked = 2,
}

/// Opaque query handle.
pub struct VerlindeQuery {
    spec: QuerySpec,
}

/// Opaque result handle.
pub struct VerlindeResult {
    output: ComputeOutput,
    value: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: VerlindeStatus, msg: &str) -> VerlindeStatus {
    set_error(msg);
    status
}

fn status_of(e: &QueryError) -> VerlindeStatus {
    match e {
        QueryError::Parse { .. } | QueryError::Center(_) => VerlindeStatus::Parse,
        QueryError::Verlinde(VerlindeError::InadmissibleLevel { .. }) => VerlindeStatus::Inadmissible,
        QueryError::Verlinde(VerlindeError::NonIntegral { .. }) => VerlindeStatus::NonIntegral,
        QueryError::Verlinde(VerlindeError::InvalidMarking(_) | VerlindeError::LevelCount { .. }) => VerlindeStatus::Parse,
        QueryError::Verlinde(_) => VerlindeStatus::Failed,
    }
}

fn guard(f: impl FnOnce() -> VerlindeStatus) -> VerlindeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(VerlindeStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, VerlindeStatus> {
    if p.is_null() {
        return Err(fail(VerlindeStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(VerlindeStatus::InvalidUtf8, "string is not UTF-8"))
}

/// Message for the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn verlinde_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn verlinde_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a query for `group` (e.g. "SO(3)", "E7'") at the given levels
/// (one, or one per simple factor) and genus.
///
/// # Safety
/// `group` must be a nul-terminated string, `levels` must point to
/// `n_levels` values, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verlinde_query_new(
    group: *const c_char,
    levels: *const u32,
    n_levels: usize,
    genus: u32,
    out: *mut *mut VerlindeQuery,
) -> VerlindeStatus {
    guard(|| {
        if out.is_null() || (levels.is_null() && n_levels > 0) {
            return fail(VerlindeStatus::NullPointer, "null argument");
        }
        let g = match read_str(group) {
            Ok(s) => s,
            Err(s) => return s,
        };
        if let Err(e) = query::parse_group(g) {
            return fail(status_of(&e), &e.to_string());
        }
        let level = if n_levels == 0 { Vec::new() } else { std::slice::from_raw_parts(levels, n_levels).to_vec() };
        let spec = QuerySpec {
            group: g.to_string(),
            level,
            genus,
            markings: Vec::new(),
            center: None,
            phi: None,
            mode: None,
            rule: Admissibility::Strict,
        };
        *out = Box::into_raw(Box::new(VerlindeQuery { spec }));
        VerlindeStatus::Ok
    })
}

/// # Safety
/// `q` must come from [`verlinde_query_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn verlinde_query_free(q: *mut VerlindeQuery) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// # Safety
/// `q` must be a live query handle.
#[no_mangle]
pub unsafe extern "C" fn verlinde_query_set_mode(q: *mut VerlindeQuery, mode: VerlindeMode) -> VerlindeStatus {
    let Some(q) = q.as_mut() else { return fail(VerlindeStatus::NullPointer, "null query") };
    q.spec.mode = match mode {
        VerlindeMode::Auto => None,
        VerlindeMode::Sc => Some(Mode::Sc),
        VerlindeMode::Ns => Some(Mode::Ns),
        VerlindeMode::Conjclass => Some(Mode::Conjclass),
        VerlindeMode::Closed => Some(Mode::Closed),
    };
    VerlindeStatus::Ok
}

/// # Safety
/// `q` must be a live query handle.
#[no_mangle]
pub unsafe extern "C" fn verlinde_query_set_rule(q: *mut VerlindeQuery, rule: VerlindeRule) -> VerlindeStatus {
    let Some(q) = q.as_mut() else { return fail(VerlindeStatus::NullPointer, "null query") };
    q.spec.rule = match rule {
        VerlindeRule::Strict => Admissibility::Strict,
        VerlindeRule::Weak => Admissibility::Weak,
        VerlindeRule::Unchecked => Admissibility::Unchecked,
    };
    VerlindeStatus::Ok
}

/// Appends a marking given in fundamental-weight coordinates.
///
/// # Safety
/// `q` must be a live query handle and `coords` must point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn verlinde_query_add_marking(q: *mut VerlindeQuery, coords: *const i64, len: usize) -> VerlindeStatus {
    let Some(q) = q.as_mut() else { return fail(VerlindeStatus::NullPointer, "null query") };
    if coords.is_null() && len > 0 {
        return fail(VerlindeStatus::NullPointer, "null coordinates");
    }
    let v = if len == 0 { Vec::new() } else { std::slice::from_raw_parts(coords, len).to_vec() };
    q.spec.markings.push(v);
    VerlindeStatus::Ok
}

/// Replaces the central subgroup with the one generated by `gens`, written
/// as in the command line (`"1,1"`, `"1,0;0,1"`).
///
/// # Safety
/// `q` must be a live query handle and `gens` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn verlinde_query_set_center(q: *mut VerlindeQuery, gens: *const c_char) -> VerlindeStatus {
    guard(|| {
        let Some(q) = q.as_mut() else { return fail(VerlindeStatus::NullPointer, "null query") };
        let s = match read_str(gens) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let named = match query::parse_group(&q.spec.group) {
            Ok(n) => n,
            Err(e) => return fail(status_of(&e), &e.to_string()),
        };
        match query::parse_center_generators(&named.group, s) {
            Ok(g) => {
                q.spec.center = Some(g.into_iter().map(|e| e.0).collect());
                VerlindeStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Sets the character of `Gamma^{2h}`: `rows` slots of `cols` exponents,
/// row-major, one exponent per generator.
///
/// # Safety
/// `q` must be a live query handle and `exps` must point to `rows * cols` values.
#[no_mangle]
pub unsafe extern "C" fn verlinde_query_set_phi(
    q: *mut VerlindeQuery,
    exps: *const i64,
    rows: usize,
    cols: usize,
) -> VerlindeStatus {
    let Some(q) = q.as_mut() else { return fail(VerlindeStatus::NullPointer, "null query") };
    if exps.is_null() && rows * cols > 0 {
        return fail(VerlindeStatus::NullPointer, "null exponents");
    }
    let flat = if rows * cols == 0 { Vec::new() } else { std::slice::from_raw_parts(exps, rows * cols).to_vec() };
    q.spec.phi = Some(if cols == 0 { vec![Vec::new(); rows] } else { flat.chunks(cols).map(<[i64]>::to_vec).collect() });
    VerlindeStatus::Ok
}

/// Evaluates the query. On success `*out` receives a result handle.
///
/// # Safety
/// `q` must be a live query handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn verlinde_query_compute(q: *const VerlindeQuery, out: *mut *mut VerlindeResult) -> VerlindeStatus {
    guard(|| {
        let Some(q) = q.as_ref() else { return fail(VerlindeStatus::NullPointer, "null query") };
        if out.is_null() {
            return fail(VerlindeStatus::NullPointer, "null output");
        }
        match query::compute(&q.spec) {
            Ok(output) => {
                let value = CString::new(output.result.value.to_string()).expect("digits");
                *out = Box::into_raw(Box::new(VerlindeResult { output, value }));
                VerlindeStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// # Safety
/// `r` must come from [`verlinde_query_compute`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn verlinde_result_free(r: *mut VerlindeResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Decimal digits of the index, owned by the result handle.
///
/// # Safety
/// `r` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn verlinde_result_value(r: *const VerlindeResult) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.value.as_ptr())
}

/// The index as a 64-bit integer; `Overflow` if it does not fit.
///
/// # Safety
/// `r` must be a live result handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn verlinde_result_value_i64(r: *const VerlindeResult, out: *mut i64) -> VerlindeStatus {
    let Some(r) = r.as_ref() else { return fail(VerlindeStatus::NullPointer, "null result") };
    if out.is_null() {
        return fail(VerlindeStatus::NullPointer, "null output");
    }
    match i64::try_from(&r.output.result.value) {
        Ok(v) => {
            *out = v;
            VerlindeStatus::Ok
        }
        Err(_) => fail(VerlindeStatus::Overflow, "index does not fit in 64 bits"),
    }
}

/// Number of `lambda` terms in the sum.
///
/// # Safety
/// `r` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn verlinde_result_terms(r: *const VerlindeResult) -> usize {
    r.as_ref().map_or(0, |r| r.output.result.per_lambda.len())
}

/// Full result as JSON; free with [`verlinde_string_free`].
///
/// # Safety
/// `r` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn verlinde_result_json(r: *const VerlindeResult) -> *mut c_char {
    let Some(r) = r.as_ref() else {
        set_error("null result");
        return ptr::null_mut();
    };
    match serde_json::to_string(&r.output) {
        Ok(s) => CString::new(s).expect("JSON has no nul").into_raw(),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `s` must come from a `*_json` function of this library.
#[no_mangle]
pub unsafe extern "C" fn verlinde_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Smallest admissible level of each simple factor of `group` (a quotient
/// name such as "SO(3)" or "E7'"). Writes up to `cap` values to `out` and
/// the factor count to `*n_out`.
///
/// # Safety
/// `group` must be a nul-terminated string, `out` must hold `cap` values and
/// `n_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verlinde_min_levels(
    group: *const c_char,
    rule: VerlindeRule,
    out: *mut u32,
    cap: usize,
    n_out: *mut usize,
) -> VerlindeStatus {
    guard(|| {
        if n_out.is_null() || (out.is_null() && cap > 0) {
            return fail(VerlindeStatus::NullPointer, "null argument");
        }
        let g = match read_str(group) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let named = match query::parse_group(g) {
            Ok(n) => n,
            Err(e) => return fail(status_of(&e), &e.to_string()),
        };
        let rule = match rule {
            VerlindeRule::Strict => Admissibility::Strict,
            VerlindeRule::Weak => Admissibility::Weak,
            VerlindeRule::Unchecked => Admissibility::Unchecked,
        };
        let levels = query::group_min_levels(&named, rule);
        *n_out = levels.len();
        for (i, (_, l)) in levels.iter().take(cap).enumerate() {
            *out.add(i) = *l;
        }
        VerlindeStatus::Ok
    })
}
