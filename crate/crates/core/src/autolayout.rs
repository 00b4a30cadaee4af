//! Pairing detected real objects with data points and moving each glyph onto
//! its physical referent.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::geometry::Vec3;
use crate::layout::glyph_box;
use crate::model::{AttributeType, GlyphId, Scene};
use crate::reality::{extract_channels, ExtractedValue, RealObject};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JoinMode {
    Rank,
    Equality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    Center,
    #[default]
    Top,
    Front,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinSpec {
    pub mode: JoinMode,
    pub object_channel: String,
    pub data_attribute: String,
    #[serde(default)]
    pub anchor: Anchor,
    #[serde(default)]
    pub clearance: f64,
    /// Restricts the glyph side to one collection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collection: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub object: String,
    pub glyph: GlyphId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    pub pairs: Vec<Pair>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmatched_objects: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmatched_glyphs: Vec<GlyphId>,
}

/// Index pairs `(object, datum)` matching the i-th largest object key with
/// the i-th largest data key. Keys are `(value, tiebreak)`; equal values fall
/// back to the ascending tiebreak.
pub fn rank_pairs(objects: &[(f64, u64)], data: &[(f64, u64)]) -> Result<Vec<(usize, usize)>> {
    if objects.len() != data.len() {
        return Err(EngineError::CardinalityMismatch {
            left: objects.len(),
            right: data.len(),
        });
    }
    let order = |keys: &[(f64, u64)]| {
        let mut ix: Vec<usize> = (0..keys.len()).collect();
        ix.sort_by(|&a, &b| {
            keys[b]
                .0
                .partial_cmp(&keys[a].0)
                .unwrap_or(Ordering::Equal)
                .then(keys[a].1.cmp(&keys[b].1))
        });
        ix
    };
    Ok(order(objects).into_iter().zip(order(data)).collect())
}

fn participants<'a>(scene: &'a Scene, spec: &JoinSpec) -> Result<(Vec<&'a RealObject>, Vec<GlyphId>)> {
    let objects: Vec<&RealObject> = scene.real_objects.iter().filter(|o| o.detected).collect();
    let carriers = scene.glyphs_with_attribute(&spec.data_attribute)?;
    let glyphs = match &spec.collection {
        Some(c) => {
            let members = &scene.collection(c)?.members;
            members.iter().copied().filter(|g| carriers.contains(g)).collect()
        }
        None => carriers,
    };
    Ok((objects, glyphs))
}

fn object_key(object: &RealObject, channel: &str) -> Result<Option<ExtractedValue>> {
    Ok(extract_channels(object)?.get(channel).cloned())
}

/// Pairs detected objects with glyphs carrying `spec.data_attribute`.
pub fn join(scene: &Scene, spec: &JoinSpec) -> Result<Correspondence> {
    let attr = scene.table.attribute(&spec.data_attribute)?;
    let col = scene
        .table
        .attribute_index(&spec.data_attribute)
        .expect("attribute resolved above");
    let (objects, glyphs) = participants(scene, spec)?;
    let datum = |g: GlyphId| -> Result<(u64, &crate::model::DataValue)> {
        let glyph = scene.glyph(g)?;
        let v = scene
            .table
            .value(glyph.row_id, col)
            .ok_or_else(|| EngineError::IntegrityViolation(format!("glyph {g} lost its row")))?;
        Ok((glyph.row_id, v))
    };

    match spec.mode {
        JoinMode::Rank => {
            if attr.kind == AttributeType::Nominal {
                return Err(EngineError::InvalidArgument(format!(
                    "rank join needs an ordered attribute, '{}' is nominal",
                    attr.name
                )));
            }
            let mut okeys = Vec::with_capacity(objects.len());
            for o in &objects {
                let v = object_key(o, &spec.object_channel)?
                    .and_then(|v| v.as_number())
                    .ok_or_else(|| {
                        EngineError::InvalidArgument(format!(
                            "object {} has no numeric channel {}",
                            o.id, spec.object_channel
                        ))
                    })?;
                okeys.push((v, u64::from(o.detection_index.unwrap_or(0))));
            }
            let mut dkeys = Vec::with_capacity(glyphs.len());
            for g in &glyphs {
                let (row, v) = datum(*g)?;
                let x = attr.numeric(v).ok_or_else(|| {
                    EngineError::InvalidArgument(format!("glyph {g} has no numeric value"))
                })?;
                dkeys.push((x, row));
            }
            let pairs = rank_pairs(&okeys, &dkeys)?
                .into_iter()
                .map(|(o, d)| Pair {
                    object: objects[o].id.clone(),
                    glyph: glyphs[d],
                })
                .collect();
            Ok(Correspondence {
                pairs,
                ..Default::default()
            })
        }
        JoinMode::Equality => {
            let mut by_text: HashMap<String, GlyphId> = HashMap::new();
            for g in &glyphs {
                let (_, v) = datum(*g)?;
                let key = v.as_text().unwrap_or_default();
                if by_text.insert(key.clone(), *g).is_some() {
                    return Err(EngineError::DuplicateKey(key));
                }
            }
            let mut seen = HashMap::new();
            let mut out = Correspondence::default();
            for o in &objects {
                let key = match object_key(o, &spec.object_channel)? {
                    Some(ExtractedValue::Text(t)) => t,
                    Some(ExtractedValue::Number(x)) => x.to_string(),
                    None => {
                        out.unmatched_objects.push(o.id.clone());
                        continue;
                    }
                };
                if seen.insert(key.clone(), ()).is_some() {
                    return Err(EngineError::DuplicateKey(key));
                }
                match by_text.get(&key) {
                    Some(g) => out.pairs.push(Pair {
                        object: o.id.clone(),
                        glyph: *g,
                    }),
                    None => out.unmatched_objects.push(o.id.clone()),
                }
            }
            out.unmatched_glyphs = glyphs
                .iter()
                .copied()
                .filter(|g| out.pairs.iter().all(|p| p.glyph != *g))
                .collect();
            Ok(out)
        }
    }
}

/// Translation that puts a glyph's anchor point on the object's.
pub fn anchored_translation(
    object: &RealObject,
    glyph_extents: [f64; 3],
    glyph_up: Vec3,
    anchor: Anchor,
    clearance: f64,
) -> Vec3 {
    let up = object.up();
    let [_, oh, od] = object.extents;
    match anchor {
        Anchor::Center => object.translation - glyph_up * (glyph_extents[1] / 2.0),
        Anchor::Top => object.translation + up * (oh / 2.0 + clearance),
        Anchor::Front => {
            let n = object.front_normal();
            object.translation + n * (od / 2.0 + clearance + glyph_extents[2] / 2.0) - up * (oh / 2.0)
        }
    }
}

impl Scene {
    /// Moves every paired glyph onto its object. All pairs are resolved
    /// before anything moves.
    pub fn place(&mut self, correspondence: &Correspondence, anchor: Anchor, clearance: f64) -> Result<()> {
        if !(clearance >= 0.0 && clearance.is_finite()) {
            return Err(EngineError::InvalidArgument(format!(
                "clearance must be non-negative, got {clearance}"
            )));
        }
        let mut moves = Vec::with_capacity(correspondence.pairs.len());
        for p in &correspondence.pairs {
            let object = self
                .real_objects
                .iter()
                .find(|o| o.id == p.object)
                .ok_or_else(|| EngineError::UnknownReference(p.object.clone()))?;
            let i = self
                .glyph_index(p.glyph)
                .ok_or_else(|| EngineError::UnknownReference(p.glyph.to_string()))?;
            let glyph = &self.glyphs[i];
            let template = self.template(&glyph.template_id)?;
            let (ext, rot) = glyph_box(glyph, template);
            let up = rot * Vec3::y();
            moves.push((i, anchored_translation(object, ext, up, anchor, clearance)));
        }
        for (i, t) in moves {
            self.glyphs[i].translation = t;
        }
        Ok(())
    }

    pub fn autolayout(&mut self, spec: &JoinSpec) -> Result<Correspondence> {
        let c = join(self, spec)?;
        self.place(&c, spec.anchor, spec.clearance)?;
        Ok(c)
    }
}
