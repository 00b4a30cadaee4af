use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RealObject;
use crate::error::{EngineError, Result};
use crate::mapping::{SizeKind, VisualChannel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExtractedValue {
    Number(f64),
    Text(String),
}

impl ExtractedValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            ExtractedValue::Number(x) => Some(*x),
            ExtractedValue::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            ExtractedValue::Text(s) => Some(s),
            ExtractedValue::Number(_) => None,
        }
    }
}

/// Channel values read off a detected object, keyed by channel name:
/// `position_{x,y,z}`, `length_{x,y,z}`, `area_{top,left,front}`, `volume`
/// and, when the object carries text, `text`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractedChannels(pub BTreeMap<String, ExtractedValue>);

impl ExtractedChannels {
    pub fn get(&self, name: &str) -> Option<&ExtractedValue> {
        self.0.get(name)
    }

    pub fn number(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(ExtractedValue::as_number)
    }

    pub fn text(&self) -> Option<&str> {
        self.get("text").and_then(ExtractedValue::as_text)
    }
}

/// Dimension (1, 2 or 3) of an extracted size channel name.
pub fn source_dimension(name: &str) -> Option<u8> {
    name.parse::<VisualChannel>()
        .ok()
        .and_then(|c| c.size_kind())
        .map(SizeKind::dimension)
}

pub fn extract_channels(object: &RealObject) -> Result<ExtractedChannels> {
    if !object.detected {
        return Err(EngineError::NotDetected(object.id.clone()));
    }
    let [w, h, d] = object.extents;
    let mut out = BTreeMap::new();
    let mut put = |k: &str, v: f64| {
        out.insert(k.to_string(), ExtractedValue::Number(v));
    };
    put("position_x", object.translation.x);
    put("position_y", object.translation.y);
    put("position_z", object.translation.z);
    put("length_x", w);
    put("length_y", h);
    put("length_z", d);
    put("area_front", w * h);
    put("area_left", h * d);
    put("area_top", w * d);
    put("volume", object.shape_factor * w * h * d);
    if let Some(text) = largest_text(object) {
        out.insert("text".into(), ExtractedValue::Text(text.to_string()));
    }
    Ok(ExtractedChannels(out))
}

/// Text of the largest region; the earliest region wins ties.
pub fn largest_text(object: &RealObject) -> Option<&str> {
    let mut best: Option<&super::TextRegion> = None;
    for region in &object.text_regions {
        if best.is_none_or(|b| region.area > b.area) {
            best = Some(region);
        }
    }
    best.map(|r| r.text.as_str())
}
