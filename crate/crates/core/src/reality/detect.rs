use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{CameraFrame, RealObject};
use crate::error::{EngineError, Result};

/// Seeded perturbation applied by the simulated detector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectionNoise {
    pub extent_relative_sigma: f64,
    pub position_sigma_m: f64,
    pub drop_probability: f64,
    pub seed: u64,
}

impl DetectionNoise {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.extent_relative_sigma >= 0.0 && self.position_sigma_m >= 0.0) {
            return Err(EngineError::InvalidArgument(
                "noise sigmas must be non-negative".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.drop_probability) {
            return Err(EngineError::InvalidArgument(
                "drop_probability must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }

    fn rng_for(&self, frame: &CameraFrame) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ frame.id.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

/// Detects ground-truth objects whose center lies in the frame's view
/// pyramid. Survivors get `detection_index` in ground-truth order. The RNG is
/// derived from `(noise.seed, frame.id)`, so equal inputs give equal output.
pub fn detect(
    ground_truth: &[RealObject],
    frame: &CameraFrame,
    noise: &DetectionNoise,
) -> Result<Vec<RealObject>> {
    noise.validate()?;
    let mut rng = noise.rng_for(frame);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut detected = Vec::new();
    for truth in ground_truth {
        if !frame.in_frustum(&truth.translation) {
            continue;
        }
        if noise.drop_probability > 0.0 && rng.random::<f64>() < noise.drop_probability {
            continue;
        }
        let mut obj = truth.clone();
        if noise.extent_relative_sigma > 0.0 {
            for e in obj.extents.iter_mut() {
                let jitter = 1.0 + noise.extent_relative_sigma * unit.sample(&mut rng);
                *e = (*e * jitter).max(*e * 1e-3);
            }
        }
        if noise.position_sigma_m > 0.0 {
            for c in obj.translation.iter_mut() {
                *c += noise.position_sigma_m * unit.sample(&mut rng);
            }
        }
        obj.detected = true;
        obj.detection_index = Some(detected.len() as u32);
        detected.push(obj);
    }
    Ok(detected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{vec3, Rotation};
    use crate::model::ViewPose;

    fn obj(id: &str, z: f64) -> RealObject {
        RealObject {
            id: id.into(),
            label: "thing".into(),
            translation: vec3(0.0, 0.0, z),
            rotation: Rotation::identity(),
            extents: [0.1, 0.2, 0.3],
            shape_factor: 1.0,
            text_regions: vec![],
            surface_luminance: 0.3,
            detected: false,
            detection_index: None,
        }
    }

    fn frame() -> CameraFrame {
        CameraFrame::uniform(ViewPose::front_facing(), 4, 4, 0.5)
    }

    #[test]
    fn noiseless_is_exact() {
        let truth = vec![obj("a", 0.0), obj("b", -1.0)];
        let got = detect(&truth, &frame(), &DetectionNoise::none()).unwrap();
        assert_eq!(got.len(), 2);
        for (g, t) in got.iter().zip(&truth) {
            assert_eq!(g.extents, t.extents);
            assert_eq!(g.translation, t.translation);
            assert!(g.detected);
        }
        assert_eq!(got[1].detection_index, Some(1));
    }

    #[test]
    fn behind_camera_never_detected() {
        let truth = vec![obj("behind", 2.0), obj("plane", 1.0), obj("front", 0.0)];
        let got = detect(&truth, &frame(), &DetectionNoise::none()).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].id, "front");
        assert_eq!(got[0].detection_index, Some(0));
    }

    #[test]
    fn seeded_drops_are_reproducible() {
        let truth: Vec<_> = (0..40).map(|i| obj(&format!("o{i}"), -(i as f64) * 0.1)).collect();
        let noise = DetectionNoise {
            drop_probability: 1.0 - 1e-3,
            seed: 7,
            ..Default::default()
        };
        let a = detect(&truth, &frame(), &noise).unwrap();
        let b = detect(&truth, &frame(), &noise).unwrap();
        assert_eq!(a, b);
        let noise = DetectionNoise {
            drop_probability: 0.5,
            extent_relative_sigma: 0.05,
            position_sigma_m: 0.01,
            seed: 11,
        };
        let a = detect(&truth, &frame(), &noise).unwrap();
        let b = detect(&truth, &frame(), &noise).unwrap();
        assert_eq!(a, b);
        assert!(a.len() < truth.len());
        assert!(a.iter().all(|o| o.extents.iter().all(|e| *e > 0.0)));
    }

    #[test]
    fn invalid_noise_rejected() {
        let noise = DetectionNoise {
            drop_probability: 1.0,
            ..Default::default()
        };
        assert!(detect(&[], &frame(), &noise).is_err());
    }
}
