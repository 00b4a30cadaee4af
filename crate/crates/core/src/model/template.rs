use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

/// Rotational symmetry order used for continuous symmetry (spheres).
pub const CONTINUOUS_SYMMETRY: u32 = 360;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hsl {
    /// Degrees in `[0, 360)`.
    pub h: f64,
    pub s: f64,
    pub l: f64,
}

/// A 3D model a data row can be objectified as.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlyphTemplate {
    pub id: String,
    /// Model-space bounding box `(x, y, z)` in meters.
    pub base_extents: [f64; 3],
    /// Orders about the y, x and z axes (matching the phi, theta, psi angle
    /// channels).
    pub symmetry_orders: [u32; 3],
    pub base_color: Hsl,
    pub material_luminance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_ref: Option<String>,
}

impl GlyphTemplate {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(EngineError::MalformedTemplate(format!("{}: {msg}", self.id)));
        if self.id.is_empty() {
            return bad("empty id".into());
        }
        if self.base_extents.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return bad(format!("extents must be positive, got {:?}", self.base_extents));
        }
        if self.symmetry_orders.contains(&0) {
            return bad("symmetry orders must be >= 1".into());
        }
        let c = self.base_color;
        if !(0.0..360.0).contains(&c.h) || !(0.0..=1.0).contains(&c.s) || !(0.0..=1.0).contains(&c.l)
        {
            return bad(format!("color out of range: {c:?}"));
        }
        if !(0.0..=1.0).contains(&self.material_luminance) {
            return bad(format!(
                "material_luminance {} outside [0, 1]",
                self.material_luminance
            ));
        }
        Ok(())
    }

    pub fn base_volume(&self) -> f64 {
        self.base_extents.iter().product()
    }

    /// A unit cube: fourfold symmetric about every principal axis.
    pub fn cube() -> Self {
        Self {
            id: "cube".into(),
            base_extents: [0.05, 0.05, 0.05],
            symmetry_orders: [4, 4, 4],
            base_color: Hsl {
                h: 210.0,
                s: 0.6,
                l: 0.5,
            },
            material_luminance: 0.5,
            mesh_ref: None,
        }
    }

    pub fn sphere() -> Self {
        Self {
            id: "sphere".into(),
            base_extents: [0.05, 0.05, 0.05],
            symmetry_orders: [CONTINUOUS_SYMMETRY; 3],
            base_color: Hsl {
                h: 30.0,
                s: 0.7,
                l: 0.5,
            },
            material_luminance: 0.5,
            mesh_ref: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_valid() {
        GlyphTemplate::cube().validate().unwrap();
        GlyphTemplate::sphere().validate().unwrap();
    }

    #[test]
    fn zero_extent_rejected() {
        let mut t = GlyphTemplate::cube();
        t.base_extents[1] = 0.0;
        assert_eq!(t.validate().unwrap_err().code(), "MalformedTemplate");
        let mut t = GlyphTemplate::cube();
        t.symmetry_orders[2] = 0;
        assert!(t.validate().is_err());
    }
}
