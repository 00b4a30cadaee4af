//! Simulated physical surroundings: ground-truth objects, a camera frame,
//! a seeded detector and channel extraction.

mod detect;
mod extract;
mod frame;
mod object;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use detect::{detect, DetectionNoise};
pub use extract::{extract_channels, largest_text, source_dimension, ExtractedChannels, ExtractedValue};
pub use frame::CameraFrame;
pub use object::{RealObject, TextRegion};

use crate::error::{EngineError, Result};
use crate::model::ViewPose;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub pose: ViewPose,
    /// Horizontal and vertical field of view in degrees.
    pub fov: [f64; 2],
    #[serde(default = "full_light")]
    pub light_estimate: f64,
}

fn full_light() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LuminanceGrid {
    pub rows: usize,
    pub cols: usize,
    pub luminance: Vec<f64>,
}

/// On-disk description of a simulated environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealityDocument {
    pub objects: Vec<RealObject>,
    pub camera: CameraSpec,
    pub frame: LuminanceGrid,
    #[serde(default)]
    pub frame_id: u64,
}

impl RealityDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: RealityDocument = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if text.trim().is_empty() {
            return Err(EngineError::EmptyFile(path.display().to_string()));
        }
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for o in &self.objects {
            o.validate()?;
        }
        let mut ids: Vec<&str> = self.objects.iter().map(|o| o.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(EngineError::InvalidArgument(format!("duplicate object id {}", w[0])));
        }
        self.camera_frame().validate()
    }

    pub fn camera_frame(&self) -> CameraFrame {
        CameraFrame {
            id: self.frame_id,
            pose: self.camera.pose,
            rows: self.frame.rows,
            cols: self.frame.cols,
            luminance: self.frame.luminance.clone(),
            light_estimate: self.camera.light_estimate,
            fov_h: self.camera.fov[0],
            fov_v: self.camera.fov[1],
        }
    }
}
