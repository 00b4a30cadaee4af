//! Manual and semi-automatic layout interactions on glyphs and collections.

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::geometry::{distribute_along, polyline_length, Rotation, Vec3};
use crate::mapping::encode;
use crate::model::{GlyphId, GlyphTemplate, Scene, ViewPose, VirtualGlyph};
use crate::reality::CameraFrame;

/// Encoded extents and world rotation of a glyph's box. The box spans
/// `[-w/2, w/2] x [0, h] x [-d/2, d/2]` around the translation.
pub fn glyph_box(glyph: &VirtualGlyph, template: &GlyphTemplate) -> ([f64; 3], Rotation) {
    (
        encode::extents(&glyph.channel_values, template),
        glyph.rotation * encode::angle_rotation(&glyph.channel_values),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "id")]
pub enum Target {
    Glyph(GlyphId),
    Collection(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseSample {
    pub t: f64,
    pub pose: ViewPose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopyOutcome {
    #[serde(with = "crate::geometry::vec3_serde")]
    pub offset: Vec3,
    /// True when the target lands exactly on the source.
    pub overlap: bool,
}

fn dedup(points: Vec<Vec3>) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = Vec::with_capacity(points.len());
    for p in points {
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
    out
}

/// Intersections of the frame's pinhole rays through `screen` points with
/// the plane `y = plane_y`. Rays that miss the plane are dropped.
pub fn project_screen_path(screen: &[[f64; 2]], frame: &CameraFrame, plane_y: f64) -> Vec<Vec3> {
    let origin = frame.pose.position;
    let hits = screen.iter().filter_map(|[u, v]| {
        let dir = frame.ray(*u, *v);
        if dir.y.abs() < 1e-12 {
            return None;
        }
        let t = (plane_y - origin.y) / dir.y;
        (t > 0.0).then(|| {
            let mut p = origin + dir * t;
            p.y = plane_y;
            p
        })
    });
    dedup(hits.collect())
}

impl Scene {
    fn members(&self, collection: &str) -> Result<Vec<GlyphId>> {
        let members = self.collection(collection)?.members.clone();
        if members.is_empty() {
            return Err(EngineError::EmptyCollection(collection.to_string()));
        }
        Ok(members)
    }

    fn target_members(&self, target: &Target) -> Result<Vec<GlyphId>> {
        match target {
            Target::Glyph(g) => self
                .glyph(*g)
                .map(|_| vec![*g])
                .map_err(|_| EngineError::UnknownTarget(g.to_string())),
            Target::Collection(c) => self
                .collection(c)
                .map(|c| c.members.clone())
                .map_err(|_| EngineError::UnknownTarget(c.clone())),
        }
    }

    fn glyph_extents(&self, id: GlyphId) -> Result<[f64; 3]> {
        let g = self.glyph(id)?;
        Ok(glyph_box(g, self.template(&g.template_id)?).0)
    }

    /// Moves a glyph within its horizontal plane, then re-stacks its
    /// collection.
    pub fn move_on_plane(&mut self, id: GlyphId, du: f64, dv: f64) -> Result<()> {
        let g = self.glyph_mut(id)?;
        g.translation.x += du;
        g.translation.z += dv;
        if let Some(c) = self.collection_of(id).map(|c| c.id.clone()) {
            self.stack_snap(&c)?;
        }
        Ok(())
    }

    /// Rigidly moves the target so its centroid sits `distance` in front of
    /// the pose.
    pub fn place_at_pose(&mut self, target: &Target, pose: &ViewPose, distance: f64) -> Result<Vec3> {
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(EngineError::NonPositiveDistance(distance));
        }
        let members = self.target_members(target)?;
        if members.is_empty() {
            return Err(EngineError::UnknownTarget(format!("{target:?}")));
        }
        let mut centroid = Vec3::zeros();
        for g in &members {
            centroid += self.glyph(*g)?.translation;
        }
        centroid /= members.len() as f64;
        let delta = pose.position + pose.forward * distance - centroid;
        for g in &members {
            self.glyph_mut(*g)?.translation += delta;
        }
        Ok(delta)
    }

    /// Distributes a collection along a screen-space path projected onto
    /// the plane `y = plane_y`. Only x and z of each member change.
    pub fn layout_sketch(
        &mut self,
        collection: &str,
        screen: &[[f64; 2]],
        frame: &CameraFrame,
        plane_y: f64,
    ) -> Result<()> {
        let members = self.members(collection)?;
        let path = project_screen_path(screen, frame, plane_y);
        if path.len() < 2 || polyline_length(&path) <= 0.0 {
            return Err(EngineError::DegeneratePath(format!(
                "{} of {} samples reach the plane y = {plane_y}",
                path.len(),
                screen.len()
            )));
        }
        self.distribute_on(&members, &path, false)
    }

    /// Distributes a collection in 3D along the points `reach` in front of
    /// each pose of a handheld sweep.
    pub fn layout_brush(&mut self, collection: &str, trace: &[PoseSample], reach: f64) -> Result<()> {
        if !(reach > 0.0 && reach.is_finite()) {
            return Err(EngineError::NonPositiveDistance(reach));
        }
        let members = self.members(collection)?;
        if trace.len() < 2 {
            return Err(EngineError::DegenerateTrace(format!("{} samples", trace.len())));
        }
        if trace.windows(2).any(|w| w[1].t.partial_cmp(&w[0].t) != Some(std::cmp::Ordering::Greater)) {
            return Err(EngineError::DegenerateTrace(
                "timestamps must increase strictly".into(),
            ));
        }
        let path = dedup(
            trace
                .iter()
                .map(|s| s.pose.position + s.pose.forward * reach)
                .collect(),
        );
        if path.len() < 2 || polyline_length(&path) <= 0.0 {
            return Err(EngineError::DegenerateTrace("the sweep does not move".into()));
        }
        self.distribute_on(&members, &path, true)
    }

    fn distribute_on(&mut self, members: &[GlyphId], path: &[Vec3], full: bool) -> Result<()> {
        let spots = distribute_along(path, members.len());
        for g in members {
            self.glyph(*g)?;
        }
        for (g, p) in members.iter().zip(spots) {
            let t = &mut self.glyph_mut(*g)?.translation;
            t.x = p.x;
            t.z = p.z;
            if full {
                t.y = p.y;
            }
        }
        Ok(())
    }

    /// Places target member `i` at source member `i` plus `offset`. The
    /// default offset is the widest source x-extent along +x.
    pub fn copy_layout(&mut self, source: &str, target: &str, offset: Option<Vec3>) -> Result<CopyOutcome> {
        let src = self.members(source)?;
        let dst = self.members(target)?;
        if src.len() != dst.len() {
            return Err(EngineError::CardinalityMismatch {
                left: src.len(),
                right: dst.len(),
            });
        }
        let offset = match offset {
            Some(o) => o,
            None => {
                let mut w: f64 = 0.0;
                for g in &src {
                    w = w.max(self.glyph_extents(*g)?[0]);
                }
                Vec3::new(w, 0.0, 0.0)
            }
        };
        let spots: Vec<Vec3> = src
            .iter()
            .map(|g| self.glyph(*g).map(|g| g.translation + offset))
            .collect::<Result<_>>()?;
        for (g, p) in dst.iter().zip(spots) {
            self.glyph_mut(*g)?.translation = p;
        }
        Ok(CopyOutcome {
            offset,
            overlap: offset == Vec3::zeros(),
        })
    }

    /// Groups members closer than half the widest horizontal extent
    /// (single linkage) and stacks each group on its lowest member. Returns
    /// the number of stacks formed.
    pub fn stack_snap(&mut self, collection: &str) -> Result<usize> {
        let members = self.collection(collection)?.members.clone();
        let n = members.len();
        let mut info = Vec::with_capacity(n);
        let mut radius: f64 = 0.0;
        for g in &members {
            let ext = self.glyph_extents(*g)?;
            let glyph = self.glyph(*g)?;
            radius = radius.max(ext[0].max(ext[2]) / 2.0);
            info.push((glyph.translation, ext[1], glyph.row_id, *g));
        }

        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (info[i].0, info[j].0);
                if (a.x - b.x).hypot(a.z - b.z) < radius {
                    let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = root(&mut parent, i);
            clusters[r].push(i);
        }

        let mut stacks = 0;
        for mut cluster in clusters.into_iter().filter(|c| c.len() > 1) {
            stacks += 1;
            cluster.sort_by(|&a, &b| {
                info[a]
                    .0
                    .y
                    .total_cmp(&info[b].0.y)
                    .then(info[a].2.cmp(&info[b].2))
                    .then(info[a].3.cmp(&info[b].3))
            });
            let anchor = info[cluster[0]].0;
            let mut y = anchor.y;
            for &k in &cluster {
                let t = &mut self.glyph_mut(info[k].3)?.translation;
                *t = Vec3::new(anchor.x, y, anchor.z);
                y += info[k].1;
            }
        }
        Ok(stacks)
    }
}
