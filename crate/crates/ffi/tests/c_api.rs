use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use verlinde_ffi::*;

fn query(group: &str, levels: &[u32], genus: u32) -> *mut VerlindeQuery {
    let g = CString::new(group).unwrap();
    let mut q = ptr::null_mut();
    let st = unsafe { verlinde_query_new(g.as_ptr(), levels.as_ptr(), levels.len(), genus, &mut q) };
    assert_eq!(st, VerlindeStatus::Ok);
    q
}

fn value(q: *mut VerlindeQuery) -> Result<i64, VerlindeStatus> {
    let mut r = ptr::null_mut();
    let st = unsafe { verlinde_query_compute(q, &mut r) };
    if st != VerlindeStatus::Ok {
        return Err(st);
    }
    let mut v = 0;
    let st = unsafe { verlinde_result_value_i64(r, &mut v) };
    let digits = unsafe { CStr::from_ptr(verlinde_result_value(r)) }.to_str().unwrap().to_string();
    unsafe { verlinde_result_free(r) };
    assert_eq!(st, VerlindeStatus::Ok);
    assert_eq!(digits, v.to_string());
    Ok(v)
}

#[test]
fn quotient_index() {
    let q = query("SO(3)", &[4], 2);
    unsafe { verlinde_query_set_mode(q, VerlindeMode::Ns) };
    assert_eq!(value(q), Ok(5));
    unsafe { verlinde_query_set_mode(q, VerlindeMode::Conjclass) };
    assert_eq!(value(q), Ok(9));
    unsafe { verlinde_query_free(q) };
}

#[test]
fn markings_and_closed() {
    let q = query("A1", &[1], 2);
    unsafe { verlinde_query_set_mode(q, VerlindeMode::Closed) };
    assert_eq!(value(q), Ok(4));
    unsafe { verlinde_query_free(q) };

    let q = query("SU(2)", &[2], 0);
    let one = [1i64];
    unsafe {
        verlinde_query_add_marking(q, one.as_ptr(), 1);
        verlinde_query_add_marking(q, one.as_ptr(), 1);
    }
    assert_eq!(value(q), Ok(1));
    unsafe { verlinde_query_free(q) };
}

#[test]
fn explicit_center_and_phi() {
    let q = query("A1xA1", &[4], 1);
    let gens = CString::new("1,1").unwrap();
    assert_eq!(unsafe { verlinde_query_set_center(q, gens.as_ptr()) }, VerlindeStatus::Ok);
    let phi = [1i64, 0];
    assert_eq!(unsafe { verlinde_query_set_phi(q, phi.as_ptr(), 2, 1) }, VerlindeStatus::Ok);
    assert!(value(q).is_ok());
    let bad = CString::new("3,0").unwrap();
    assert_eq!(unsafe { verlinde_query_set_center(q, bad.as_ptr()) }, VerlindeStatus::Parse);
    unsafe { verlinde_query_free(q) };
}

#[test]
fn error_codes() {
    let q = query("SO(3)", &[2], 1);
    assert_eq!(value(q), Err(VerlindeStatus::Inadmissible));
    let msg = unsafe { CStr::from_ptr(verlinde_last_error()) }.to_str().unwrap();
    assert!(msg.contains("not admissible"), "{msg}");
    unsafe { verlinde_query_set_rule(q, VerlindeRule::Weak) };
    assert_eq!(value(q), Err(VerlindeStatus::NonIntegral));
    unsafe { verlinde_query_free(q) };

    let g = CString::new("Foo(3)").unwrap();
    let mut q = ptr::null_mut();
    let st = unsafe { verlinde_query_new(g.as_ptr(), [1u32].as_ptr(), 1, 1, &mut q) };
    assert_eq!(st, VerlindeStatus::Parse);
    assert!(q.is_null());
    let st = unsafe { verlinde_query_new(ptr::null(), ptr::null(), 0, 1, &mut q) };
    assert_eq!(st, VerlindeStatus::NullPointer);
    assert_eq!(unsafe { verlinde_query_compute(ptr::null(), ptr::null_mut()) }, VerlindeStatus::NullPointer);
}

#[test]
fn json_and_levels() {
    let q = query("PSU(3)", &[3], 1);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { verlinde_query_compute(q, &mut r) }, VerlindeStatus::Ok);
    assert!(unsafe { verlinde_result_terms(r) } > 0);
    let s = unsafe { verlinde_result_json(r) };
    let json = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    assert!(json.contains("\"cover\":\"A2\""), "{json}");
    unsafe {
        verlinde_string_free(s);
        verlinde_result_free(r);
        verlinde_query_free(q);
    }

    let g = CString::new("SO(3)xE7'").unwrap();
    let mut out = [0u32; 4];
    let mut n = 0;
    let st = unsafe { verlinde_min_levels(g.as_ptr(), VerlindeRule::Strict, out.as_mut_ptr(), out.len(), &mut n) };
    assert_eq!(st, VerlindeStatus::Ok);
    assert_eq!(&out[..n], &[4, 4]);
    assert!(!unsafe { CStr::from_ptr(verlinde_version()) }.to_bytes().is_empty());
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/verlinde.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["verlinde_query_new", "verlinde_query_compute", "verlinde_result_value_i64", "VERLINDE_STATUS_INADMISSIBLE"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = std::env::temp_dir().join(format!("verlinde-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("probe.c");
    std::fs::write(&src, "#include \"verlinde.h\"\nint main(void) { VerlindeQuery *q = 0; (void)q; return VERLINDE_STATUS_OK; }\n").unwrap();
    let out = match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .output()
    {
        Ok(o) => o,
        Err(e) => panic!("no C compiler available: {e}"),
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
