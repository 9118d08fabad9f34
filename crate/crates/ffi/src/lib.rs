//! C ABI over the deprscan library.
//!
//! Handles are opaque. Every fallible call returns a [`DsStatus`]; on
//! failure the calling thread's last error message is set and can be read
//! with [`deprscan_last_error_message`]. Strings handed out by this library
//! must be released with [`deprscan_string_free`], databases with
//! [`deprscan_db_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use serde_json::json;

use deprscan::depdb::{DeprecationDb, MatchKind};
use deprscan::extractor::{extract_library, ExtractorConfig};
use deprscan::scan::scan_file;
use deprscan::Error;

/// Opaque database handle.
pub struct DsDb(DeprecationDb);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullArg = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Syntax = 4,
    Schema = 5,
    Format = 6,
    Config = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(DsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } | Error::InvalidPath(_) => DsStatus::Io,
            Error::Schema { .. } => DsStatus::Schema,
            Error::Format(_) => DsStatus::Format,
            Error::Syntax(_) => DsStatus::Syntax,
            Error::Config(_) => DsStatus::Config,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DsStatus::Panic
        }
    }
}

unsafe fn arg_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(DsStatus::NullArg, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(DsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn arg_db<'a>(p: *const DsDb, what: &str) -> Result<&'a DeprecationDb, Failure> {
    p.as_ref().map(|d| &d.0).ok_or_else(|| Failure(DsStatus::NullArg, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut *mut T) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(DsStatus::NullArg, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(DsStatus::Format, "output contains a NUL byte".into()))
}

fn emit_db(out: *mut *mut DsDb, db: DeprecationDb) {
    unsafe { *out = Box::into_raw(Box::new(DsDb(db))) };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn deprscan_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn deprscan_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `out` must be a valid pointer to a `DsDb*`.
#[no_mangle]
pub unsafe extern "C" fn deprscan_db_new(out: *mut *mut DsDb) -> DsStatus {
    guard(|| {
        out_ptr(out)?;
        emit_db(out, DeprecationDb::default());
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn deprscan_db_load(path: *const c_char, out: *mut *mut DsDb) -> DsStatus {
    guard(|| {
        out_ptr(out)?;
        let path = arg_str(path, "path")?;
        emit_db(out, DeprecationDb::load(Path::new(path))?);
        Ok(())
    })
}

/// # Safety
/// `db` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn deprscan_db_save(db: *const DsDb, path: *const c_char) -> DsStatus {
    guard(|| {
        let db = arg_db(db, "db")?;
        let path = arg_str(path, "path")?;
        db.save(Path::new(path))?;
        Ok(())
    })
}

/// Union of `a` and `b`; records of `a` win on duplicate keys. Neither input
/// is consumed.
///
/// # Safety
/// `a` and `b` must come from this library; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn deprscan_db_merge(a: *const DsDb, b: *const DsDb, out: *mut *mut DsDb) -> DsStatus {
    guard(|| {
        out_ptr(out)?;
        let merged = arg_db(a, "a")?.merge(arg_db(b, "b")?);
        emit_db(out, merged);
        Ok(())
    })
}

/// Number of records; 0 for NULL.
///
/// # Safety
/// `db` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn deprscan_db_record_count(db: *const DsDb) -> usize {
    db.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `db` must be NULL or come from this library, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn deprscan_db_free(db: *mut DsDb) {
    if !db.is_null() {
        drop(Box::from_raw(db));
    }
}

/// Mines a library source tree with the default configuration. `version`
/// may be NULL to detect it from the sources.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn deprscan_extract_library(
    root: *const c_char,
    library: *const c_char,
    version: *const c_char,
    out: *mut *mut DsDb,
) -> DsStatus {
    guard(|| {
        out_ptr(out)?;
        let root = arg_str(root, "root")?;
        let library = arg_str(library, "library")?;
        let version = if version.is_null() { None } else { Some(arg_str(version, "version")?) };
        let x = extract_library(Path::new(root), library, version, &ExtractorConfig::default())?;
        emit_db(out, DeprecationDb::from_extraction(&x));
        Ok(())
    })
}

/// JSON array of `{"kind", "approximate", "record"}` objects for `fqn`.
///
/// # Safety
/// `db` must come from this library; `fqn` NUL-terminated; `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn deprscan_db_lookup_json(db: *const DsDb, fqn: *const c_char, out_json: *mut *mut c_char) -> DsStatus {
    guard(|| {
        out_ptr(out_json)?;
        let db = arg_db(db, "db")?;
        let fqn = arg_str(fqn, "fqn")?;
        let matches: Vec<_> = db
            .lookup(fqn)
            .iter()
            .map(|m| {
                let kind = match m.kind {
                    MatchKind::Exact => "exact",
                    MatchKind::Alias => "alias",
                    MatchKind::Suffix => "suffix",
                };
                json!({ "kind": kind, "approximate": m.approximate(), "record": m.record })
            })
            .collect();
        *out_json = into_c_string(serde_json::Value::from(matches).to_string())?;
        Ok(())
    })
}

/// Scans one Python source text and writes its diagnostics as a JSON array.
/// `path` is only used to label spans.
///
/// # Safety
/// `db` must come from this library; strings NUL-terminated; `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn deprscan_scan_source(
    db: *const DsDb,
    path: *const c_char,
    source: *const c_char,
    out_json: *mut *mut c_char,
) -> DsStatus {
    guard(|| {
        out_ptr(out_json)?;
        let db = arg_db(db, "db")?;
        let path = arg_str(path, "path")?;
        let source = arg_str(source, "source")?;
        let diags = scan_file(Path::new(path), source, db).map_err(|e| Failure(DsStatus::Syntax, e.to_string()))?;
        let text = serde_json::to_string(&diags).map_err(|e| Failure(DsStatus::Format, e.to_string()))?;
        *out_json = into_c_string(text)?;
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn deprscan_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
