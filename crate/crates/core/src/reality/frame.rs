use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::geometry::Vec3;
use crate::model::ViewPose;

/// One camera image reduced to what the engine needs: a pose, pinhole
/// intrinsics and a row-major luminance grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraFrame {
    #[serde(default)]
    pub id: u64,
    pub pose: ViewPose,
    pub rows: usize,
    pub cols: usize,
    pub luminance: Vec<f64>,
    pub light_estimate: f64,
    /// Horizontal field of view, degrees.
    pub fov_h: f64,
    /// Vertical field of view, degrees.
    pub fov_v: f64,
}

impl CameraFrame {
    pub fn uniform(pose: ViewPose, rows: usize, cols: usize, value: f64) -> Self {
        Self {
            id: 0,
            pose,
            rows,
            cols,
            luminance: vec![value; rows * cols],
            light_estimate: 1.0,
            fov_h: 60.0,
            fov_v: 45.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.luminance.is_empty() {
            return Err(EngineError::EmptyFrame);
        }
        if self.luminance.len() != self.rows * self.cols {
            return Err(EngineError::InvalidArgument(format!(
                "frame has {} samples, expected {} x {}",
                self.luminance.len(),
                self.rows,
                self.cols
            )));
        }
        if self.luminance.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(EngineError::InvalidArgument(
                "luminance samples must lie in [0, 1]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.light_estimate) {
            return Err(EngineError::InvalidArgument(
                "light_estimate must lie in [0, 1]".into(),
            ));
        }
        for fov in [self.fov_h, self.fov_v] {
            if !(fov > 0.0 && fov < 180.0) {
                return Err(EngineError::InvalidArgument(format!(
                    "field of view {fov} outside (0, 180)"
                )));
            }
        }
        self.pose.validate()
    }

    pub fn sample(&self, row: usize, col: usize) -> f64 {
        self.luminance[row * self.cols + col]
    }

    fn half_tans(&self) -> (f64, f64) {
        (
            (self.fov_h.to_radians() / 2.0).tan(),
            (self.fov_v.to_radians() / 2.0).tan(),
        )
    }

    /// Camera-space coordinates `(right, up, depth)` of a world point.
    pub fn to_camera(&self, p: &Vec3) -> Vec3 {
        let rel = p - self.pose.position;
        Vec3::new(
            rel.dot(&self.pose.right()),
            rel.dot(&self.pose.up),
            rel.dot(&self.pose.forward),
        )
    }

    /// Continuous pixel coordinates `(col, row)` of a world point, or `None`
    /// if it is not in front of the camera. Points outside the image still
    /// project (possibly to negative or too-large coordinates).
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64)> {
        let c = self.to_camera(p);
        if c.z <= 0.0 {
            return None;
        }
        let (tx, ty) = self.half_tans();
        let u = 0.5 + 0.5 * c.x / (c.z * tx);
        let v = 0.5 - 0.5 * c.y / (c.z * ty);
        Some((u * self.cols as f64, v * self.rows as f64))
    }

    /// Symmetric view-pyramid test; points on or behind the camera plane are
    /// outside.
    pub fn in_frustum(&self, p: &Vec3) -> bool {
        let c = self.to_camera(p);
        if c.z <= 0.0 {
            return false;
        }
        let (tx, ty) = self.half_tans();
        c.x.abs() <= c.z * tx && c.y.abs() <= c.z * ty
    }

    /// World-space ray direction through normalized screen point `(u, v)`,
    /// `u` to the right and `v` downwards, both in `[0, 1]`.
    pub fn ray(&self, u: f64, v: f64) -> Vec3 {
        let (tx, ty) = self.half_tans();
        let x = (2.0 * u - 1.0) * tx;
        let y = (1.0 - 2.0 * v) * ty;
        (self.pose.forward + self.pose.right() * x + self.pose.up * y).normalize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vec3;

    #[test]
    fn center_projects_to_middle() {
        let f = CameraFrame::uniform(ViewPose::front_facing(), 10, 20, 0.5);
        let (c, r) = f.project(&vec3(0.0, 0.0, 0.0)).unwrap();
        assert_eq!((c, r), (10.0, 5.0));
        assert!(f.project(&vec3(0.0, 0.0, 2.0)).is_none());
        assert!(f.in_frustum(&vec3(0.0, 0.0, 0.0)));
        assert!(!f.in_frustum(&vec3(0.0, 0.0, 1.0)));
        assert!(!f.in_frustum(&vec3(5.0, 0.0, 0.0)));
    }

    #[test]
    fn ray_through_center_is_forward() {
        let f = CameraFrame::uniform(ViewPose::front_facing(), 10, 20, 0.5);
        assert_eq!(f.ray(0.5, 0.5), vec3(0.0, 0.0, -1.0));
        let up = f.ray(0.5, 0.0);
        assert!(up.y > 0.0);
    }

    #[test]
    fn validation() {
        let mut f = CameraFrame::uniform(ViewPose::front_facing(), 2, 2, 0.5);
        f.validate().unwrap();
        f.luminance[0] = 1.5;
        assert!(f.validate().is_err());
        f.luminance.clear();
        assert_eq!(f.validate().unwrap_err().code(), "EmptyFrame");
    }
}
