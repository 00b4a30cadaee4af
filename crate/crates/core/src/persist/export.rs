use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{to_canonical_json, write_atomic, FORMAT_VERSION};
use crate::error::Result;
use crate::geometry::{rotation_to_wxyz, vec3_serde, Vec3};
use crate::mapping::encode;
use crate::model::{GlyphId, Hsl, Scene};

/// Smallest exported axis scale; a zero data value on a size channel would
/// otherwise collapse the node.
pub const MIN_EXPORT_SCALE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportNode {
    pub id: GlyphId,
    pub template: String,
    #[serde(with = "vec3_serde")]
    pub translation: Vec3,
    /// `[w, x, y, z]`.
    pub rotation: [f64; 4],
    pub scale: [f64; 3],
    pub color: Hsl,
    pub opacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportDocument {
    pub format_version: u64,
    pub nodes: Vec<ExportNode>,
}

pub fn export_document(scene: &Scene) -> Result<ExportDocument> {
    let mut nodes = Vec::with_capacity(scene.glyphs.len());
    for g in &scene.glyphs {
        let template = scene.template(&g.template_id)?;
        let scale = encode::scale_factors(&g.channel_values, template).map(|s| s.max(MIN_EXPORT_SCALE));
        let (color, opacity) = encode::color(&g.channel_values, template);
        nodes.push(ExportNode {
            id: g.id,
            template: g.template_id.clone(),
            translation: g.translation,
            rotation: rotation_to_wxyz(&(g.rotation * encode::angle_rotation(&g.channel_values))),
            scale,
            color,
            opacity,
        });
    }
    Ok(ExportDocument {
        format_version: FORMAT_VERSION,
        nodes,
    })
}

pub fn export_scene(scene: &Scene, path: &Path) -> Result<String> {
    let text = to_canonical_json(&export_document(scene)?)?;
    write_atomic(path, &text)?;
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::{BindOptions, VisualChannel};
    use crate::model::{AttributeType, DataAttribute, DataTable, DataValue, GlyphTemplate, RowFilter};

    fn scene() -> Scene {
        let table = DataTable::new(
            vec![
                DataAttribute::quantitative("h", 0.0, 10.0).unwrap(),
                DataAttribute::categorical("kind", AttributeType::Nominal, ["a", "b", "c"]).unwrap(),
            ],
            vec![
                vec![DataValue::Number(10.0), DataValue::from("a")],
                vec![DataValue::Number(0.0), DataValue::from("b")],
            ],
        )
        .unwrap();
        let mut s = Scene::new(table);
        let mut t = GlyphTemplate::cube();
        t.base_extents = [1.0, 1.0, 1.0];
        s.add_template(t).unwrap();
        s.instantiate_glyphs(&RowFilter::All, "cube").unwrap();
        s
    }

    #[test]
    fn unbound_is_unit() {
        let doc = export_document(&scene()).unwrap();
        assert_eq!(doc.nodes[0].scale, [1.0, 1.0, 1.0]);
        assert_eq!(doc.nodes[0].color, GlyphTemplate::cube().base_color);
        assert_eq!(doc.nodes[0].rotation, [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn per_axis_and_hue() {
        let mut s = scene();
        s.bind("h", VisualChannel::LengthY, BindOptions { scale: Some(1.0), ..Default::default() })
            .unwrap();
        s.bind("kind", VisualChannel::ColorHue, BindOptions::default()).unwrap();
        let doc = export_document(&s).unwrap();
        assert_eq!(doc.nodes[0].scale, [1.0, 10.0, 1.0]);
        assert_eq!(doc.nodes[1].scale[1], MIN_EXPORT_SCALE);
        assert_eq!(doc.nodes[0].color.h, 0.0);
        assert_eq!(doc.nodes[1].color.h, 120.0);
        let a = to_canonical_json(&doc).unwrap();
        let b = to_canonical_json(&export_document(&s).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
