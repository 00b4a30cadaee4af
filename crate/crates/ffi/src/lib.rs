//! C ABI over the authoring engine.
//!
//! Every string crossing the boundary is UTF-8 and NUL-terminated. Strings
//! returned through `out` parameters are owned by the caller and must be
//! released with [`marvist_string_free`]. The pointer from
//! [`marvist_engine_last_error`] stays owned by the handle.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use marvist::engine::Engine;
use marvist::persist::{export_document, to_canonical_json, GalleryClient};
use marvist::EngineError;

/// Opaque engine handle.
pub struct MarvistEngine {
    engine: Engine,
    last_error: Option<CString>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarvistStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// The engine rejected the call; see `marvist_engine_last_error`.
    EngineError = 3,
    Panic = 4,
}

enum Failure {
    Status(MarvistStatus, String),
    Engine(EngineError),
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::Engine(e)
    }
}

fn error_json(code: &str, message: &str) -> CString {
    let v = serde_json::json!({"code": code, "message": message});
    CString::new(v.to_string()).unwrap_or_default()
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Status(MarvistStatus::NullArgument, "null string argument".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(MarvistStatus::InvalidUtf8, "argument is not UTF-8".into()))
}

fn to_c(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure::Status(MarvistStatus::Panic, "interior NUL in output".into()))
}

/// Runs `f` against the handle, recording any failure on it.
unsafe fn with_engine(
    handle: *mut MarvistEngine,
    out: *mut *mut c_char,
    f: impl FnOnce(&mut Engine) -> Result<String, Failure>,
) -> MarvistStatus {
    if handle.is_null() || out.is_null() {
        return MarvistStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let h = &mut *handle;
    let result = catch_unwind(AssertUnwindSafe(|| f(&mut h.engine).and_then(to_c)));
    let failure = match result {
        Ok(Ok(s)) => {
            h.last_error = None;
            *out = s;
            return MarvistStatus::Ok;
        }
        Ok(Err(f)) => f,
        Err(_) => Failure::Status(MarvistStatus::Panic, "engine panicked".into()),
    };
    let (status, json) = match failure {
        Failure::Engine(e) => (MarvistStatus::EngineError, error_json(e.code(), &e.to_string())),
        Failure::Status(s, msg) => (s, error_json(&format!("{s:?}"), &msg)),
    };
    h.last_error = Some(json);
    status
}

fn canonical<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    Ok(to_canonical_json(value)?)
}

/// Creates an engine whose relative paths resolve against `base_dir`
/// (the process working directory when null). Returns null on failure.
///
/// # Safety
/// `base_dir` must be null or a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn marvist_engine_new(base_dir: *const c_char) -> *mut MarvistEngine {
    let dir = if base_dir.is_null() {
        None
    } else {
        match read_str(base_dir) {
            Ok(s) => Some(s.to_owned()),
            Err(_) => return ptr::null_mut(),
        }
    };
    let built = catch_unwind(|| {
        let mut engine = Engine::new(GalleryClient::from_env());
        if let Some(d) = dir {
            engine.set_base_dir(d);
        }
        engine
    });
    match built {
        Ok(engine) => Box::into_raw(Box::new(MarvistEngine { engine, last_error: None })),
        Err(_) => ptr::null_mut(),
    }
}

/// # Safety
/// `handle` must come from `marvist_engine_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn marvist_engine_free(handle: *mut MarvistEngine) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Executes one command line. On success `*out_json` holds the outcome
/// (the JSON literal `null` for blank or comment lines).
///
/// # Safety
/// `handle` must be live, `line` a valid string and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn marvist_engine_execute(
    handle: *mut MarvistEngine,
    line: *const c_char,
    out_json: *mut *mut c_char,
) -> MarvistStatus {
    let line = match read_str(line) {
        Ok(l) => l.to_owned(),
        Err(_) if handle.is_null() || out_json.is_null() => return MarvistStatus::NullArgument,
        Err(f) => return with_engine(handle, out_json, |_| Err(f)),
    };
    with_engine(handle, out_json, |engine| {
        let outcome = engine.execute_line(&line)?;
        serde_json::to_string(&outcome).map_err(|e| Failure::Engine(EngineError::Io(e.to_string())))
    })
}

/// Writes the canonical scene document to `*out_json`.
///
/// # Safety
/// `handle` must be live and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn marvist_engine_scene_json(
    handle: *mut MarvistEngine,
    out_json: *mut *mut c_char,
) -> MarvistStatus {
    with_engine(handle, out_json, |engine| canonical(&engine.document()))
}

/// Writes the canonical export document to `*out_json`.
///
/// # Safety
/// `handle` must be live and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn marvist_engine_export_json(
    handle: *mut MarvistEngine,
    out_json: *mut *mut c_char,
) -> MarvistStatus {
    with_engine(handle, out_json, |engine| canonical(&export_document(engine.scene())?))
}

/// `{"code": ..., "message": ...}` for the last failed call, or null.
/// Valid until the next call on the same handle.
///
/// # Safety
/// `handle` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn marvist_engine_last_error(handle: *const MarvistEngine) -> *const c_char {
    match handle.as_ref().and_then(|h| h.last_error.as_ref()) {
        Some(s) => s.as_ptr(),
        None => ptr::null(),
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn marvist_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn marvist_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
