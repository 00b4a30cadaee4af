use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{to_canonical_json, write_atomic};
use crate::error::{EngineError, Result};
use crate::model::Scene;

pub const FORMAT_VERSION: u64 = 1;

/// On-disk scene. Keys this version does not know are kept in `extra` and
/// written back unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDocument {
    pub format_version: u64,
    #[serde(flatten)]
    pub scene: Scene,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl SceneDocument {
    pub fn new(scene: Scene) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            scene,
            extra: BTreeMap::new(),
        }
    }

    pub fn to_canonical_string(&self) -> Result<String> {
        to_canonical_json(self)
    }

    pub fn parse(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(EngineError::EmptyFile("<scene>".into()));
        }
        let tree: Value = serde_json::from_str(text)?;
        let found = tree.get("format_version").and_then(Value::as_u64).unwrap_or(0);
        if found != FORMAT_VERSION {
            return Err(EngineError::VersionMismatch {
                found,
                supported: FORMAT_VERSION,
            });
        }
        let doc: SceneDocument = serde_json::from_value(tree)?;
        doc.scene.validate_integrity()?;
        Ok(doc)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.scene.validate_integrity()?;
        write_atomic(path, &self.to_canonical_string()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

pub fn save_scene(scene: &Scene, path: &Path) -> Result<()> {
    SceneDocument::new(scene.clone()).save(path)
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    SceneDocument::load(path).map(|d| d.scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::{BindOptions, VisualChannel};
    use crate::model::{DataAttribute, DataTable, DataValue, GlyphTemplate, RowFilter};

    fn sample() -> Scene {
        let table = DataTable::new(
            vec![DataAttribute::quantitative("cost", 0.0, 30.0).unwrap()],
            vec![vec![DataValue::Number(10.0)], vec![DataValue::Number(30.0)]],
        )
        .unwrap();
        let mut s = Scene::new(table);
        s.add_template(GlyphTemplate::cube()).unwrap();
        let ids = s.instantiate_glyphs(&RowFilter::All, "cube").unwrap();
        s.group_collection(None, &ids, None).unwrap();
        s.bind("cost", VisualChannel::LengthY, BindOptions::default()).unwrap();
        s
    }

    #[test]
    fn round_trip_is_canonical() {
        let doc = SceneDocument::new(sample());
        let text = doc.to_canonical_string().unwrap();
        let back = SceneDocument::parse(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_canonical_string().unwrap(), text);
        assert!(!back.scene.diagnostics.is_empty());
    }

    #[test]
    fn unknown_fields_survive() {
        let text = SceneDocument::new(sample()).to_canonical_string().unwrap();
        let mut tree: Value = serde_json::from_str(&text).unwrap();
        tree["annotations"] = serde_json::json!({"note": "keep me"});
        let doc = SceneDocument::parse(&tree.to_string()).unwrap();
        assert_eq!(doc.extra["annotations"]["note"], "keep me");
        assert!(doc.to_canonical_string().unwrap().contains("keep me"));
    }

    #[test]
    fn version_and_integrity() {
        let text = SceneDocument::new(sample()).to_canonical_string().unwrap();
        let mut tree: Value = serde_json::from_str(&text).unwrap();
        tree["format_version"] = 2.into();
        let err = SceneDocument::parse(&tree.to_string()).unwrap_err();
        assert_eq!(err, EngineError::VersionMismatch { found: 2, supported: 1 });

        let mut tree: Value = serde_json::from_str(&text).unwrap();
        tree["collections"][0]["members"][0] = "g41".into();
        let err = SceneDocument::parse(&tree.to_string()).unwrap_err();
        assert_eq!(err.code(), "IntegrityViolation");
        assert!(err.to_string().contains("g41"));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        save_scene(&sample(), &path).unwrap();
        let first = std::fs::read_to_string(&path).unwrap();
        let loaded = load_scene(&path).unwrap();
        assert_eq!(loaded, sample());
        save_scene(&loaded, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), first);
    }
}
