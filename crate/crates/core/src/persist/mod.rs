//! CSV ingestion, canonical scene documents, export and the glyph gallery.

mod csv;
pub mod export;
pub mod gallery;
mod scene_doc;

use std::path::Path;

use serde::Serialize;

pub use self::csv::{load_csv, parse_csv, ColumnSpec, TypeAnnotations};
pub use export::{export_document, export_scene, ExportDocument, ExportNode};
pub use gallery::{parse_template, GalleryClient};
pub use scene_doc::{load_scene, save_scene, SceneDocument, FORMAT_VERSION};

use crate::error::Result;

/// Pretty JSON with sorted keys and shortest round-trip floats, ending in a
/// newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let tree = serde_json::to_value(value)?;
    let mut out = serde_json::to_string_pretty(&tree)?;
    out.push('\n');
    Ok(out)
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
