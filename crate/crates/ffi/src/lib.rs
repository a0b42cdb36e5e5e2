//! C interface to `ontofact`.
//!
//! Tables and factorizations are opaque heap handles released with their
//! `_free` function. Every fallible call returns an [`OntofactStatus`];
//! on failure [`ontofact_last_error`] describes the problem. Strings handed
//! out by the library must be released with [`ontofact_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ontofact::analysis::analyze;
use ontofact::compression::{
    compress_method1, compress_method2, BlockUniformOF, CompressionParams,
};
use ontofact::quantum::{kernaghan_table, pauli_qubit_table};
use ontofact::{
    bounds_report, determinize, model1, model2, model3, parse_factorization, parse_table,
    serialize_factorization, serialize_table, verify_of, DataTable, DeterminizePolicy, Error,
    OntFactorization,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OntofactStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Structural = 4,
    InvalidTable = 5,
    InvalidFactorization = 6,
    Resource = 7,
    Rationalization = 8,
    InvalidArgument = 9,
    Panic = 10,
}

/// Opaque data table.
pub struct OntofactTable(DataTable);

/// Opaque ontological factorization.
pub struct OntofactFactorization(OntFactorization);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(OntofactStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Structural(_) => OntofactStatus::Structural,
            Error::Parse { .. } => OntofactStatus::Parse,
            Error::InvalidTable(_) => OntofactStatus::InvalidTable,
            Error::InvalidFactorization(_) => OntofactStatus::InvalidFactorization,
            Error::Resource(_) => OntofactStatus::Resource,
            Error::Rationalization(_) => OntofactStatus::Rationalization,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OntofactStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            OntofactStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            OntofactStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(OntofactStatus::NullPointer, "null pointer argument".into())
}

unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a [u8], Failure> {
    if p.is_null() {
        return Err(null());
    }
    Ok(CStr::from_ptr(p).to_bytes())
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    let c =
        CString::new(s).map_err(|_| Failure(OntofactStatus::InvalidUtf8, "interior NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put_value<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    *out = value;
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ontofact_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ontofact_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a table document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_table_from_json(
    json: *const c_char,
    out: *mut *mut OntofactTable,
) -> OntofactStatus {
    guard(|| put(out, OntofactTable(parse_table(text(json)?)?)))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_table_pauli(out: *mut *mut OntofactTable) -> OntofactStatus {
    guard(|| put(out, OntofactTable(pauli_qubit_table())))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_table_kernaghan(out: *mut *mut OntofactTable) -> OntofactStatus {
    guard(|| put(out, OntofactTable(kernaghan_table())))
}

/// # Safety
/// `table` must be a live handle or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_table_to_json(
    table: *const OntofactTable,
    out: *mut *mut c_char,
) -> OntofactStatus {
    guard(|| put_string(out, serialize_table(&borrow(table)?.0)))
}

/// # Safety
/// `table` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_table_dims(
    table: *const OntofactTable,
    d: *mut usize,
    m: *mut usize,
    s: *mut usize,
) -> OntofactStatus {
    guard(|| {
        let t = &borrow(table)?.0;
        put_value(d, t.d())?;
        put_value(m, t.m())?;
        put_value(s, t.s())
    })
}

/// Exact rank of the table matrix.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_table_rank(
    table: *const OntofactTable,
    out: *mut usize,
) -> OntofactStatus {
    guard(|| put_value(out, borrow(table)?.0.rank()))
}

/// # Safety
/// `table` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ontofact_table_free(table: *mut OntofactTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Builds Model 1, 2 or 3.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_factor(
    table: *const OntofactTable,
    model: u32,
    out: *mut *mut OntofactFactorization,
) -> OntofactStatus {
    guard(|| {
        let t = &borrow(table)?.0;
        let f = match model {
            1 => model1(t)?,
            2 => model2(t)?,
            3 => model3(t)?,
            _ => {
                return Err(Failure(
                    OntofactStatus::InvalidArgument,
                    format!("no model {model}"),
                ))
            }
        };
        put(out, OntofactFactorization(f))
    })
}

/// Deterministic expansion; `random != 0` selects the seeded shuffle policy.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_determinize(
    table: *const OntofactTable,
    of: *const OntofactFactorization,
    random: u32,
    seed: u64,
    out: *mut *mut OntofactFactorization,
) -> OntofactStatus {
    guard(|| {
        let policy = if random != 0 {
            DeterminizePolicy::SeededRandom { seed }
        } else {
            DeterminizePolicy::Contiguous
        };
        let f = determinize(&borrow(table)?.0, &borrow(of)?.0, policy)?;
        put(out, OntofactFactorization(f))
    })
}

/// Compresses with method 1 (block-uniform input) or method 2 (Model 2 input).
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_compress(
    table: *const OntofactTable,
    of: *const OntofactFactorization,
    method: u32,
    seed: u64,
    restarts: usize,
    iterations: usize,
    out: *mut *mut OntofactFactorization,
) -> OntofactStatus {
    guard(|| {
        let (t, f) = (&borrow(table)?.0, &borrow(of)?.0);
        let params = CompressionParams {
            seed,
            restarts,
            iterations,
            ..CompressionParams::default()
        };
        let g = match method {
            1 => compress_method1(t, &BlockUniformOF::new(f.clone())?, &params)?,
            2 => compress_method2(t, f, &params)?,
            _ => {
                return Err(Failure(
                    OntofactStatus::InvalidArgument,
                    format!("no method {method}"),
                ))
            }
        };
        put(out, OntofactFactorization(g))
    })
}

/// Sets `*valid` to whether `M P` reproduces the table exactly.
///
/// # Safety
/// Handles must be live; `valid` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_verify(
    table: *const OntofactTable,
    of: *const OntofactFactorization,
    valid: *mut bool,
) -> OntofactStatus {
    guard(|| {
        let report = verify_of(&borrow(table)?.0, &borrow(of)?.0)?;
        put_value(valid, report.valid)
    })
}

/// # Safety
/// `of` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_factorization_omega(
    of: *const OntofactFactorization,
    out: *mut usize,
) -> OntofactStatus {
    guard(|| put_value(out, borrow(of)?.0.omega()))
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_factorization_from_json(
    json: *const c_char,
    out: *mut *mut OntofactFactorization,
) -> OntofactStatus {
    guard(|| {
        put(
            out,
            OntofactFactorization(parse_factorization(text(json)?)?),
        )
    })
}

/// # Safety
/// `of` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_factorization_to_json(
    of: *const OntofactFactorization,
    out: *mut *mut c_char,
) -> OntofactStatus {
    guard(|| put_string(out, serialize_factorization(&borrow(of)?.0)))
}

/// # Safety
/// `of` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ontofact_factorization_free(of: *mut OntofactFactorization) {
    if !of.is_null() {
        drop(Box::from_raw(of));
    }
}

/// Bounds report as a JSON string.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_bounds_json(
    table: *const OntofactTable,
    out: *mut *mut c_char,
) -> OntofactStatus {
    guard(|| {
        let report = bounds_report(&borrow(table)?.0)?;
        put_string(
            out,
            serde_json::to_string(&report).expect("report serializes"),
        )
    })
}

/// Analysis report as a JSON string.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontofact_analyze_json(
    table: *const OntofactTable,
    of: *const OntofactFactorization,
    out: *mut *mut c_char,
) -> OntofactStatus {
    guard(|| {
        let report = analyze(&borrow(table)?.0, &borrow(of)?.0)?;
        put_string(
            out,
            serde_json::to_string(&report).expect("report serializes"),
        )
    })
}
