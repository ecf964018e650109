use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use permtwins_ffi::*;

const WORKED_HOST: [i64; 30] =
    [26, 16, 28, 29, 10, 5, 24, 27, 1, 22, 11, 8, 2, 23, 15, 19, 25, 21, 20, 13, 9, 30, 17, 12, 18, 7, 3, 14, 4, 6];

fn host(values: &[i64]) -> *mut PtPermutation {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { pt_permutation_new(values.as_ptr(), values.len(), &mut p) }, PtStatus::Ok);
    p
}

fn last_error() -> String {
    let raw = pt_last_error();
    assert!(!raw.is_null());
    let s = unsafe { CStr::from_ptr(raw) }.to_string_lossy().into_owned();
    unsafe { pt_string_free(raw) };
    s
}

fn verified(h: *const PtPermutation, c: *const PtCertificate) -> bool {
    let mut ok = false;
    assert_eq!(unsafe { pt_verify(h, c, &mut ok) }, PtStatus::Ok);
    ok
}

#[test]
fn permutation_round_trip() {
    let h = host(&[3, 1, 2]);
    assert_eq!(unsafe { pt_permutation_len(h) }, 3);
    let mut buf = [0i64; 3];
    assert_eq!(unsafe { pt_permutation_values(h, buf.as_mut_ptr(), 3) }, PtStatus::Ok);
    assert_eq!(buf, [3, 1, 2]);
    assert_eq!(unsafe { pt_permutation_values(h, buf.as_mut_ptr(), 2) }, PtStatus::BufferTooSmall);
    unsafe { pt_permutation_free(h) };

    let mut p = ptr::null_mut();
    let dup = [1i64, 1];
    assert_eq!(unsafe { pt_permutation_new(dup.as_ptr(), 2, &mut p) }, PtStatus::InvalidArgument);
    assert!(last_error().contains("duplicate"));
    assert!(p.is_null());
}

#[test]
fn certificate_json_and_verify() {
    let h = host(&WORKED_HOST);
    let json = CString::new(r#"{"r":2,"k":3,"indices":[[20,23,27],[24,25,29]]}"#).unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { pt_certificate_from_json(h, json.as_ptr(), &mut c) }, PtStatus::Ok);
    assert!(verified(h, c));
    assert_eq!(unsafe { (pt_certificate_multiplicity(c), pt_certificate_length(c)) }, (2, 3));
    let mut pos = [0usize; 3];
    assert_eq!(unsafe { pt_certificate_positions(c, 1, pos.as_mut_ptr(), 3) }, PtStatus::Ok);
    assert_eq!(pos, [23, 24, 28]);
    assert_eq!(unsafe { pt_certificate_positions(c, 2, pos.as_mut_ptr(), 3) }, PtStatus::InvalidArgument);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { pt_certificate_to_json(c, &mut out) }, PtStatus::Ok);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { pt_string_free(out) };
    assert!(text.contains("[20,23,27]"));

    // 18 replaced by 7 breaks similarity
    let bad = CString::new(r#"{"r":2,"k":3,"indices":[[20,23,27],[24,26,29]]}"#).unwrap();
    let mut c2 = ptr::null_mut();
    assert_eq!(unsafe { pt_certificate_from_json(h, bad.as_ptr(), &mut c2) }, PtStatus::Ok);
    assert!(!verified(h, c2));

    let junk = CString::new("{").unwrap();
    let mut c3 = ptr::null_mut();
    assert_eq!(unsafe { pt_certificate_from_json(h, junk.as_ptr(), &mut c3) }, PtStatus::Parse);
    unsafe {
        pt_certificate_free(c);
        pt_certificate_free(c2);
        pt_permutation_free(h);
    }
}

#[test]
fn finders_produce_valid_certificates() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { pt_permutation_random(3000, 42, &mut h) }, PtStatus::Ok);
    for r in [2, 3] {
        let mut c = ptr::null_mut();
        assert_eq!(unsafe { pt_find_constructive(h, r, &mut c) }, PtStatus::Ok);
        assert!(verified(h, c));
        unsafe { pt_certificate_free(c) };
        assert_eq!(unsafe { pt_find_matching(h, r, 0, 0, &mut c) }, PtStatus::Ok);
        assert!(verified(h, c));
        assert!(unsafe { pt_certificate_length(c) } > 0);
        unsafe { pt_certificate_free(c) };
        assert_eq!(unsafe { pt_es_twins(h, r, &mut c) }, PtStatus::Ok);
        assert!(verified(h, c));
        unsafe { pt_certificate_free(c) };
    }
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { pt_greedy_square(h, &mut c) }, PtStatus::Ok);
    assert!(verified(h, c));
    assert_eq!(unsafe { pt_certificate_multiplicity(c) }, unsafe { pt_certificate_length(c) });
    unsafe { pt_certificate_free(c) };
    assert_eq!(unsafe { pt_find_matching(h, 1, 0, 0, &mut c) }, PtStatus::InvalidArgument);
    unsafe { pt_permutation_free(h) };
}

#[test]
fn exact_oracle_and_budget() {
    let h = host(&[1, 2, 3, 4, 5, 6, 7, 8]);
    let mut c = ptr::null_mut();
    let mut exact = false;
    assert_eq!(unsafe { pt_exact_twins(h, 2, 0, false, &mut c, &mut exact) }, PtStatus::Ok);
    assert!(exact);
    assert_eq!(unsafe { pt_certificate_length(c) }, 4);
    unsafe { pt_certificate_free(c) };
    unsafe { pt_permutation_free(h) };

    let mut big = ptr::null_mut();
    assert_eq!(unsafe { pt_permutation_random(14, 3, &mut big) }, PtStatus::Ok);
    assert_eq!(unsafe { pt_exact_twins(big, 2, 5, false, &mut c, ptr::null_mut()) }, PtStatus::BudgetExceeded);
    assert_eq!(unsafe { pt_exact_twins(big, 2, 5, true, &mut c, &mut exact) }, PtStatus::Ok);
    assert!(!exact);
    assert!(verified(big, c));
    unsafe {
        pt_certificate_free(c);
        pt_permutation_free(big);
    }
}

#[test]
fn moments() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pt_expected_twin_count(6, 2, 2, &mut s) }, PtStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(s) }.to_str().unwrap(), "45/2");
    unsafe { pt_string_free(s) };
    assert_eq!(unsafe { pt_expected_twin_count(5, 3, 2, &mut s) }, PtStatus::InvalidArgument);
    let mut l = 0.0;
    assert_eq!(unsafe { pt_log_expected_twin_count(6, 2, 2, &mut l) }, PtStatus::Ok);
    assert!((l - 22.5f64.ln()).abs() < 1e-12);
    assert_eq!(pt_upper_threshold(1, 2), 6);
}

#[test]
fn null_handles_are_rejected() {
    let mut ok = false;
    assert_eq!(unsafe { pt_verify(ptr::null(), ptr::null(), &mut ok) }, PtStatus::NullPointer);
    assert_eq!(unsafe { pt_permutation_len(ptr::null()) }, 0);
    unsafe {
        pt_permutation_free(ptr::null_mut());
        pt_certificate_free(ptr::null_mut());
        pt_string_free(ptr::null_mut());
    }
    let msg = unsafe { CStr::from_ptr(pt_status_message(PtStatus::BudgetExceeded)) };
    assert_eq!(msg.to_str().unwrap(), "budget exceeded");
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/permtwins.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "pt_permutation_new",
        "pt_verify",
        "pt_find_matching",
        "PT_STATUS_BUDGET_EXCEEDED",
        "typedef struct PtCertificate PtCertificate",
    ] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = Command::new(compiler).args(["-fsyntax-only", "-x", lang]).arg(&header).status();
        match status {
            Ok(s) => assert!(s.success(), "{compiler} rejected the header"),
            Err(_) => eprintln!("{compiler} not available; skipped"),
        }
    }
}
