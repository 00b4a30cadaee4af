use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use marvist_ffi::*;
use serde_json::Value;

struct Handle(*mut MarvistEngine);

impl Handle {
    fn new() -> Self {
        let h = unsafe { marvist_engine_new(ptr::null()) };
        assert!(!h.is_null());
        Handle(h)
    }

    fn exec(&self, line: &str) -> (MarvistStatus, Option<Value>) {
        let line = CString::new(line).unwrap();
        let mut out = ptr::null_mut();
        let status = unsafe { marvist_engine_execute(self.0, line.as_ptr(), &mut out) };
        (status, take(out))
    }

    fn last_error(&self) -> Value {
        let p = unsafe { marvist_engine_last_error(self.0) };
        assert!(!p.is_null());
        serde_json::from_str(unsafe { CStr::from_ptr(p) }.to_str().unwrap()).unwrap()
    }
}

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { marvist_engine_free(self.0) }
    }
}

fn take(p: *mut std::ffi::c_char) -> Option<Value> {
    if p.is_null() {
        return None;
    }
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { marvist_string_free(p) };
    Some(serde_json::from_str(&s).unwrap())
}

#[test]
fn execute_and_read_scene() {
    let h = Handle::new();
    let (st, out) = h.exec("fetch-glyph cube");
    assert_eq!(st, MarvistStatus::Ok);
    assert_eq!(out.unwrap()["command"], "fetch-glyph");

    let (st, out) = h.exec("# only a comment");
    assert_eq!(st, MarvistStatus::Ok);
    assert_eq!(out, Some(Value::Null));

    let mut out = ptr::null_mut();
    let st = unsafe { marvist_engine_scene_json(h.0, &mut out) };
    assert_eq!(st, MarvistStatus::Ok);
    let scene = take(out).unwrap();
    assert_eq!(scene["format_version"], 1);
    assert!(scene["templates"].to_string().contains("cube"));

    let mut out = ptr::null_mut();
    let st = unsafe { marvist_engine_export_json(h.0, &mut out) };
    assert_eq!(st, MarvistStatus::Ok);
    assert_eq!(take(out).unwrap()["nodes"], Value::Array(vec![]));
}

#[test]
fn engine_errors_carry_codes() {
    let h = Handle::new();
    let (st, out) = h.exec("instantiate --template nowhere");
    assert_eq!(st, MarvistStatus::EngineError);
    assert!(out.is_none());
    assert_eq!(h.last_error()["code"], "UnknownTemplate");

    let (st, _) = h.exec("frobnicate");
    assert_eq!(st, MarvistStatus::EngineError);
    assert_eq!(h.last_error()["code"], "Parse");

    // A successful call clears the error.
    h.exec("fetch-glyph cube");
    assert!(unsafe { marvist_engine_last_error(h.0) }.is_null());
}

#[test]
fn null_and_bad_arguments() {
    let h = Handle::new();
    let mut out = ptr::null_mut();
    let st = unsafe { marvist_engine_execute(h.0, ptr::null(), &mut out) };
    assert_eq!(st, MarvistStatus::NullArgument);
    let line = CString::new("undo").unwrap();
    let st = unsafe { marvist_engine_execute(ptr::null_mut(), line.as_ptr(), &mut out) };
    assert_eq!(st, MarvistStatus::NullArgument);
    let st = unsafe { marvist_engine_execute(h.0, line.as_ptr(), ptr::null_mut()) };
    assert_eq!(st, MarvistStatus::NullArgument);

    let bad = [0xffu8, 0xfe, 0];
    let st = unsafe { marvist_engine_execute(h.0, bad.as_ptr().cast(), &mut out) };
    assert_eq!(st, MarvistStatus::InvalidUtf8);
    assert_eq!(h.last_error()["code"], "InvalidUtf8");

    unsafe {
        marvist_engine_free(ptr::null_mut());
        marvist_string_free(ptr::null_mut());
    }
    assert!(unsafe { marvist_engine_last_error(ptr::null()) }.is_null());
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(marvist_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/marvist.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "marvist_engine_new",
        "marvist_engine_free",
        "marvist_engine_execute",
        "marvist_engine_scene_json",
        "marvist_engine_export_json",
        "marvist_engine_last_error",
        "marvist_string_free",
        "MARVIST_STATUS_ENGINE_ERROR = 3",
    ] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(&src, "#include \"marvist.h\"\nint main(void) { return marvist_version() == 0; }\n").unwrap();
    let status = match Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler on PATH; syntax check skipped");
            return;
        }
    };
    assert!(status.success());
}
