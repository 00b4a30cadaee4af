#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use marvist::engine::Engine;
use marvist::persist::GalleryClient;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures().join(rel)
}

/// Offline engine that resolves templates from the fixture gallery and
/// relative paths against the fixture root.
pub fn engine() -> Engine {
    Engine::new(GalleryClient::new(None, fixture("gallery"))).with_base_dir(fixtures())
}

pub fn run_lines(engine: &mut Engine, lines: &str) {
    for line in lines.lines() {
        if let Err(e) = engine.execute_line(line) {
            panic!("'{line}' failed: {} {e}", e.code());
        }
    }
}

pub fn copy_tree(src: &Path, dst: &Path) {
    std::fs::create_dir_all(dst).unwrap();
    for entry in std::fs::read_dir(src).unwrap() {
        let entry = entry.unwrap();
        let to = dst.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_tree(&entry.path(), &to);
        } else {
            std::fs::copy(entry.path(), to).unwrap();
        }
    }
}

/// A scratch copy of the fixture tree.
pub fn scratch() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_tree(&fixtures(), dir.path());
    dir
}

pub fn marvist(dir: &Path) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_marvist"));
    cmd.current_dir(dir)
        .env("MARVIST_CACHE_DIR", dir.join("gallery"))
        .env_remove("MARVIST_GALLERY_URL");
    cmd
}

pub fn text(o: &Output) -> (String, String) {
    (
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}
