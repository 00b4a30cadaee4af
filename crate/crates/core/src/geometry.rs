//! Vector and rotation aliases plus their document encodings.
//!
//! Vectors serialize as `[x, y, z]`; rotations as `[w, x, y, z]`.

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use crate::error::{EngineError, Result};

pub type Vec3 = Vector3<f64>;
pub type Rotation = UnitQuaternion<f64>;

pub const QUAT_NORM_TOLERANCE: f64 = 1e-9;

pub fn vec3(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

/// Builds a rotation from `[w, x, y, z]`. Coordinates already unit within
/// tolerance are kept bit-for-bit so documents round-trip exactly.
pub fn rotation_from_wxyz(q: [f64; 4]) -> Result<Rotation> {
    let raw = Quaternion::new(q[0], q[1], q[2], q[3]);
    let norm = raw.norm();
    if !norm.is_finite() || norm < 1e-9 {
        return Err(EngineError::InvalidArgument(format!(
            "rotation quaternion {q:?} has near-zero norm"
        )));
    }
    if (norm - 1.0).abs() <= QUAT_NORM_TOLERANCE {
        Ok(UnitQuaternion::new_unchecked(raw))
    } else {
        Ok(UnitQuaternion::new_normalize(raw))
    }
}

pub fn rotation_to_wxyz(r: &Rotation) -> [f64; 4] {
    let q = r.quaternion();
    [q.w, q.i, q.j, q.k]
}

pub mod vec3_serde {
    use super::Vec3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vec3, s: S) -> Result<S::Ok, S::Error> {
        [v.x, v.y, v.z].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec3, D::Error> {
        let a = <[f64; 3]>::deserialize(d)?;
        Ok(Vec3::new(a[0], a[1], a[2]))
    }
}

pub mod rotation_serde {
    use super::{rotation_from_wxyz, rotation_to_wxyz, Rotation};
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Rotation, s: S) -> Result<S::Ok, S::Error> {
        rotation_to_wxyz(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rotation, D::Error> {
        let a = <[f64; 4]>::deserialize(d)?;
        rotation_from_wxyz(a).map_err(D::Error::custom)
    }
}

/// Arc length of a polyline.
pub fn polyline_length(points: &[Vec3]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Points at equal arc-length spacing along `points`: parameters k/(n-1),
/// or the midpoint when `n == 1`.
pub fn distribute_along(points: &[Vec3], n: usize) -> Vec<Vec3> {
    let total = polyline_length(points);
    let targets: Vec<f64> = match n {
        0 => Vec::new(),
        1 => vec![0.5 * total],
        _ => (0..n)
            .map(|k| total * k as f64 / (n - 1) as f64)
            .collect(),
    };
    targets
        .into_iter()
        .map(|s| point_at_arc_length(points, s))
        .collect()
}

fn point_at_arc_length(points: &[Vec3], s: f64) -> Vec3 {
    let mut walked = 0.0;
    for w in points.windows(2) {
        let seg = (w[1] - w[0]).norm();
        if seg == 0.0 {
            continue;
        }
        if s <= walked + seg {
            let t = ((s - walked) / seg).clamp(0.0, 1.0);
            return w[0] + (w[1] - w[0]) * t;
        }
        walked += seg;
    }
    *points.last().expect("non-empty polyline")
}
