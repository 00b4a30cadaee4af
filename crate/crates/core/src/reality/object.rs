use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::geometry::{rotation_serde, vec3_serde, Rotation, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextRegion {
    pub text: String,
    /// Square meters.
    pub area: f64,
}

fn one() -> f64 {
    1.0
}

/// A physical object, either as ground truth or as detected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealObject {
    pub id: String,
    pub label: String,
    /// Center of the bounding box.
    #[serde(with = "vec3_serde")]
    pub translation: Vec3,
    #[serde(with = "rotation_serde")]
    pub rotation: Rotation,
    /// Bounding box `(w, h, d)` along the object's local x, y, z.
    pub extents: [f64; 3],
    /// Ratio of true volume to bounding-box volume (pi/6 for a sphere).
    #[serde(default = "one")]
    pub shape_factor: f64,
    #[serde(default)]
    pub text_regions: Vec<TextRegion>,
    pub surface_luminance: f64,
    #[serde(default)]
    pub detected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection_index: Option<u32>,
}

impl RealObject {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(EngineError::InvalidArgument(format!("object {}: {m}", self.id)));
        if self.extents.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return bad(format!("extents must be positive, got {:?}", self.extents));
        }
        if !(self.shape_factor > 0.0 && self.shape_factor <= 1.0) {
            return bad(format!("shape_factor {} outside (0, 1]", self.shape_factor));
        }
        if !(0.0..=1.0).contains(&self.surface_luminance) {
            return bad("surface_luminance outside [0, 1]".into());
        }
        if self.text_regions.iter().any(|t| t.area.is_nan() || t.area < 0.0) {
            return bad("text region areas must be non-negative".into());
        }
        if self.detected != self.detection_index.is_some() {
            return bad("detection_index must be set exactly when detected".into());
        }
        Ok(())
    }

    /// Unit normal of the face the object shows to the front (local +z).
    pub fn front_normal(&self) -> Vec3 {
        self.rotation * Vec3::z()
    }

    pub fn up(&self) -> Vec3 {
        self.rotation * Vec3::y()
    }
}
