//! C ABI over `permtwins`.
//!
//! Permutations and certificates are opaque heap handles released with their
//! `*_free` function. Every fallible call returns a [`PtStatus`] and writes
//! its result through an out-pointer; the message for the most recent failure
//! on the calling thread is available from [`pt_last_error`]. Strings handed
//! out by this library must be released with [`pt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use permtwins::matching::{self, GridParams, DEFAULT_DEGREE_CUTOFF};
use permtwins::oracle::{exact_twins_length, OnExceed, OracleBudget};
use permtwins::twins::CertificateJson;
use permtwins::{baselines, constructive, moments, verify, Permutation, TwinsCertificate, TwinsError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    InvalidCertificate = 4,
    BudgetExceeded = 5,
    BufferTooSmall = 6,
    Internal = 7,
    Panic = 8,
}

/// Opaque permutation handle.
pub struct PtPermutation(Permutation);

/// Opaque certificate handle: r position lists of common length k.
pub struct PtCertificate(TwinsCertificate);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &TwinsError) -> PtStatus {
    match e {
        TwinsError::Parse(_) => PtStatus::Parse,
        TwinsError::BudgetExceeded { .. } => PtStatus::BudgetExceeded,
        TwinsError::InvalidCertificate(_) | TwinsError::LemmaViolation { .. } => PtStatus::InvalidCertificate,
        TwinsError::ConstructionBug(_) => PtStatus::Internal,
        _ => PtStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and converting panics into [`PtStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), (PtStatus, String)>) -> PtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside permtwins");
            PtStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (PtStatus, String)>;
}

impl<T> IntoFfi<T> for Result<T, TwinsError> {
    fn ffi(self) -> Result<T, (PtStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (PtStatus, String) {
    (PtStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PtStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), (PtStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn emit_cert(out: *mut *mut PtCertificate, cert: TwinsCertificate) -> Result<(), (PtStatus, String)> {
    write_out(out, Box::into_raw(Box::new(PtCertificate(cert))))
}

fn emit_string(s: String) -> Result<*mut c_char, (PtStatus, String)> {
    CString::new(s).map(CString::into_raw).map_err(|e| (PtStatus::Internal, e.to_string()))
}

/// Short description of a status code. The string is static; do not free it.
#[no_mangle]
pub extern "C" fn pt_status_message(status: PtStatus) -> *const c_char {
    let s: &'static CStr = match status {
        PtStatus::Ok => c"ok",
        PtStatus::NullPointer => c"null pointer",
        PtStatus::InvalidArgument => c"invalid argument",
        PtStatus::Parse => c"parse error",
        PtStatus::InvalidCertificate => c"invalid certificate",
        PtStatus::BudgetExceeded => c"budget exceeded",
        PtStatus::BufferTooSmall => c"buffer too small",
        PtStatus::Internal => c"internal error",
        PtStatus::Panic => c"panic",
    };
    s.as_ptr()
}

/// Message of the last failure on this thread, or null. Free with [`pt_string_free`].
#[no_mangle]
pub extern "C" fn pt_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |m| m.clone().into_raw()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Copies `len` distinct integers into a new permutation.
///
/// # Safety
/// `values` must point to `len` readable integers; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_permutation_new(values: *const i64, len: usize, out: *mut *mut PtPermutation) -> PtStatus {
    guard(|| {
        if values.is_null() && len > 0 {
            return Err(null("values"));
        }
        let v = if len == 0 { Vec::new() } else { std::slice::from_raw_parts(values, len).to_vec() };
        let p = Permutation::new(v).ffi()?;
        write_out(out, Box::into_raw(Box::new(PtPermutation(p))))
    })
}

/// A uniform random permutation of `1..=n`, determined by `seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_permutation_random(n: usize, seed: u64, out: *mut *mut PtPermutation) -> PtStatus {
    guard(|| {
        let p = permtwins::random_permutation(n, seed).ffi()?;
        write_out(out, Box::into_raw(Box::new(PtPermutation(p))))
    })
}

/// # Safety
/// `p` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn pt_permutation_free(p: *mut PtPermutation) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Length of `p`, or 0 for null.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_permutation_len(p: *const PtPermutation) -> usize {
    p.as_ref().map_or(0, |p| p.0.len())
}

/// Copies the values of `p` into `buf`, which must hold at least `len(p)` entries.
///
/// # Safety
/// `buf` must point to `buf_len` writable integers.
#[no_mangle]
pub unsafe extern "C" fn pt_permutation_values(p: *const PtPermutation, buf: *mut i64, buf_len: usize) -> PtStatus {
    guard(|| {
        let p = deref(p, "permutation")?;
        if buf_len < p.0.len() {
            return Err((PtStatus::BufferTooSmall, format!("need {} entries", p.0.len())));
        }
        if p.0.is_empty() {
            return Ok(());
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(p.0.values().as_ptr(), buf, p.0.len());
        Ok(())
    })
}

/// Parses `{"r":..,"k":..,"indices":[[..],..]}` (1-based positions) against `host`.
///
/// # Safety
/// `host` must be a live handle, `json` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_certificate_from_json(
    host: *const PtPermutation,
    json: *const c_char,
    out: *mut *mut PtCertificate,
) -> PtStatus {
    guard(|| {
        let host = deref(host, "host")?;
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| (PtStatus::Parse, e.to_string()))?;
        let cert = CertificateJson::parse(text).and_then(|c| c.into_certificate(&host.0)).ffi()?;
        emit_cert(out, cert)
    })
}

/// Serializes `cert` in the same JSON shape. Free the string with [`pt_string_free`].
///
/// # Safety
/// `cert` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_certificate_to_json(cert: *const PtCertificate, out: *mut *mut c_char) -> PtStatus {
    guard(|| {
        let cert = deref(cert, "certificate")?;
        write_out(out, emit_string(cert.0.to_json_string())?)
    })
}

/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_certificate_free(cert: *mut PtCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Number of lists r, or 0 for null.
///
/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_certificate_multiplicity(cert: *const PtCertificate) -> usize {
    cert.as_ref().map_or(0, |c| c.0.r)
}

/// Common list length k, or 0 for null.
///
/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_certificate_length(cert: *const PtCertificate) -> usize {
    cert.as_ref().map_or(0, |c| c.0.k)
}

/// Copies list `list` (0-based positions) into `buf`.
///
/// # Safety
/// `buf` must point to `buf_len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn pt_certificate_positions(
    cert: *const PtCertificate,
    list: usize,
    buf: *mut usize,
    buf_len: usize,
) -> PtStatus {
    guard(|| {
        let cert = deref(cert, "certificate")?;
        let l = cert
            .0
            .index_lists
            .get(list)
            .ok_or_else(|| (PtStatus::InvalidArgument, format!("list {list} out of range")))?;
        if buf_len < l.len() {
            return Err((PtStatus::BufferTooSmall, format!("need {} entries", l.len())));
        }
        if l.is_empty() {
            return Ok(());
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(l.as_ptr(), buf, l.len());
        Ok(())
    })
}

/// Writes whether `cert` is a valid twins certificate for `host`.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_verify(host: *const PtPermutation, cert: *const PtCertificate, out: *mut bool) -> PtStatus {
    guard(|| {
        let ok = verify(&deref(host, "host")?.0, &deref(cert, "certificate")?.0).ffi()?;
        write_out(out, ok)
    })
}

/// Deterministic block-and-remove finder.
///
/// # Safety
/// `host` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_find_constructive(
    host: *const PtPermutation,
    r: usize,
    out: *mut *mut PtCertificate,
) -> PtStatus {
    guard(|| {
        let host = deref(host, "host")?;
        emit_cert(out, constructive::find(&host.0, r).ffi()?.cert)
    })
}

/// Block-grid matching finder. `a = 0` picks the default block size and
/// `cutoff = 0` the default degree cutoff.
///
/// # Safety
/// `host` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_find_matching(
    host: *const PtPermutation,
    r: usize,
    a: usize,
    cutoff: usize,
    out: *mut *mut PtCertificate,
) -> PtStatus {
    guard(|| {
        let host = deref(host, "host")?;
        let cutoff = if cutoff == 0 { DEFAULT_DEGREE_CUTOFF } else { cutoff };
        let params = if a == 0 {
            GridParams { degree_cutoff: cutoff, ..GridParams::for_host(host.0.len(), r).ffi()? }
        } else {
            GridParams::new(host.0.len(), r, a, cutoff).ffi()?
        };
        emit_cert(out, matching::find(&host.0, &params).ffi()?.cert)
    })
}

/// r-twins cut from a longest monotone subsequence.
///
/// # Safety
/// `host` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_es_twins(host: *const PtPermutation, r: usize, out: *mut *mut PtCertificate) -> PtStatus {
    guard(|| emit_cert(out, baselines::es_twins(&deref(host, "host")?.0, r).ffi()?))
}

/// A square (multiplicity equal to length) from repeated monotone extraction.
///
/// # Safety
/// `host` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_greedy_square(host: *const PtPermutation, out: *mut *mut PtCertificate) -> PtStatus {
    guard(|| emit_cert(out, baselines::greedy_square(&deref(host, "host")?.0).ffi()?))
}

/// Exact maximum twin length with a witness. `max_nodes = 0` uses the default
/// budget. When `lower_bound` is set, an exhausted budget still yields the
/// best certificate found and `exact_out` (if not null) receives false.
///
/// # Safety
/// `host` must be live; `out` writable; `exact_out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pt_exact_twins(
    host: *const PtPermutation,
    r: usize,
    max_nodes: u64,
    lower_bound: bool,
    out: *mut *mut PtCertificate,
    exact_out: *mut bool,
) -> PtStatus {
    guard(|| {
        let host = deref(host, "host")?;
        let mut budget = OracleBudget::default();
        if max_nodes > 0 {
            budget.max_nodes = max_nodes;
        }
        if lower_bound {
            budget.on_exceed = OnExceed::ReturnLowerBound;
        }
        let o = exact_twins_length(&host.0, r, &budget).ffi()?;
        if !exact_out.is_null() {
            exact_out.write(o.exact);
        }
        emit_cert(out, o.witness)
    })
}

/// Natural log of the expected number of r-twins of length k in a random
/// permutation of `[n]`; negative infinity when `r * k > n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_log_expected_twin_count(n: usize, k: usize, r: usize, out: *mut f64) -> PtStatus {
    guard(|| {
        if r < 2 {
            return Err((PtStatus::InvalidArgument, format!("multiplicity must be at least 2, got {r}")));
        }
        write_out(out, moments::log_expected_twin_count(n, k, r))
    })
}

/// The same expectation as an exact fraction `"num/den"`. Free with [`pt_string_free`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_expected_twin_count(n: usize, k: usize, r: usize, out: *mut *mut c_char) -> PtStatus {
    guard(|| write_out(out, emit_string(moments::expected_twin_count(n, k, r).ffi()?.to_string())?))
}

/// `ceil(2e * n^(r/(2r-1)))`.
#[no_mangle]
pub extern "C" fn pt_upper_threshold(n: usize, r: usize) -> u64 {
    moments::upper_threshold(n, r)
}
