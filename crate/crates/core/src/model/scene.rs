use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::data::{DataTable, RowFilter};
use super::template::GlyphTemplate;
use crate::error::{EngineError, Result};
use crate::geometry::{rotation_serde, vec3, vec3_serde, Rotation, Vec3, QUAT_NORM_TOLERANCE};
use crate::mapping::{VisualChannel, VisualMapping};
use crate::nudging::ValidationReport;
use crate::reality::{CameraFrame, RealObject};

/// Spacing of the initial placement grid, meters.
pub const GRID_SPACING: f64 = 0.05;
/// Columns of the initial placement grid (row-major, along +x then +z).
pub const GRID_COLUMNS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlyphId(pub u64);

impl fmt::Display for GlyphId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

impl FromStr for GlyphId {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s.strip_prefix('g').unwrap_or(s);
        digits
            .parse()
            .map(GlyphId)
            .map_err(|_| EngineError::Parse(format!("bad glyph id '{s}'")))
    }
}

impl Serialize for GlyphId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GlyphId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One data row objectified as a 3D node. `translation` is the bottom-center
/// of the glyph's bounding box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualGlyph {
    pub id: GlyphId,
    pub row_id: u64,
    pub template_id: String,
    #[serde(with = "vec3_serde")]
    pub translation: Vec3,
    #[serde(with = "rotation_serde")]
    pub rotation: Rotation,
    pub channel_values: BTreeMap<VisualChannel, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collection {
    pub id: String,
    pub members: Vec<GlyphId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grouping_key: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewPose {
    #[serde(with = "vec3_serde")]
    pub position: Vec3,
    #[serde(with = "vec3_serde")]
    pub forward: Vec3,
    #[serde(with = "vec3_serde")]
    pub up: Vec3,
}

impl ViewPose {
    pub fn new(position: Vec3, forward: Vec3, up: Vec3) -> Result<Self> {
        let pose = Self {
            position,
            forward,
            up,
        };
        pose.validate()?;
        Ok(pose)
    }

    /// Normalizes `forward` and re-orthogonalizes `up` against it.
    pub fn looking(position: Vec3, forward: Vec3, up_hint: Vec3) -> Result<Self> {
        let f = forward
            .try_normalize(1e-12)
            .ok_or_else(|| EngineError::InvalidArgument("zero forward vector".into()))?;
        let u = (up_hint - f * up_hint.dot(&f))
            .try_normalize(1e-12)
            .ok_or_else(|| EngineError::InvalidArgument("up parallel to forward".into()))?;
        Self::new(position, f, u)
    }

    /// Camera at +z looking down -z with +y up.
    pub fn front_facing() -> Self {
        Self {
            position: vec3(0.0, 0.0, 1.0),
            forward: vec3(0.0, 0.0, -1.0),
            up: vec3(0.0, 1.0, 0.0),
        }
    }

    pub fn right(&self) -> Vec3 {
        self.forward.cross(&self.up)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: &Vec3| (v.norm() - 1.0).abs() <= 1e-9;
        if !unit(&self.forward) || !unit(&self.up) {
            return Err(EngineError::InvalidArgument(
                "view forward/up must be unit vectors".into(),
            ));
        }
        if self.forward.dot(&self.up).abs() > 1e-6 {
            return Err(EngineError::InvalidArgument(
                "view up must be orthogonal to forward".into(),
            ));
        }
        if !self.position.iter().all(|c| c.is_finite()) {
            return Err(EngineError::InvalidArgument("non-finite view position".into()));
        }
        Ok(())
    }
}

impl Default for ViewPose {
    fn default() -> Self {
        Self::front_facing()
    }
}

fn default_light() -> f64 {
    1.0
}

/// Root aggregate. All mutation goes through `&mut Scene` methods, which keep
/// referential integrity; `Clone` is the snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub table: DataTable,
    pub templates: BTreeMap<String, GlyphTemplate>,
    pub glyphs: Vec<VirtualGlyph>,
    pub collections: Vec<Collection>,
    pub real_objects: Vec<RealObject>,
    pub view: ViewPose,
    #[serde(default = "default_light")]
    pub light_estimate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<CameraFrame>,
    pub mappings: Vec<VisualMapping>,
    #[serde(default)]
    pub diagnostics: Vec<ValidationReport>,
    #[serde(default)]
    pub next_glyph_id: u64,
}

impl Default for Scene {
    fn default() -> Self {
        Self {
            table: DataTable::default(),
            templates: BTreeMap::new(),
            glyphs: Vec::new(),
            collections: Vec::new(),
            real_objects: Vec::new(),
            view: ViewPose::default(),
            light_estimate: 1.0,
            frame: None,
            mappings: Vec::new(),
            diagnostics: Vec::new(),
            next_glyph_id: 0,
        }
    }
}

impl Scene {
    pub fn new(table: DataTable) -> Self {
        Self {
            table,
            ..Self::default()
        }
    }

    pub fn snapshot(&self) -> Scene {
        self.clone()
    }

    pub fn add_template(&mut self, template: GlyphTemplate) -> Result<()> {
        template.validate()?;
        self.templates.insert(template.id.clone(), template);
        Ok(())
    }

    pub fn template(&self, id: &str) -> Result<&GlyphTemplate> {
        self.templates
            .get(id)
            .ok_or_else(|| EngineError::UnknownTemplate(id.to_string()))
    }

    pub fn glyph_index(&self, id: GlyphId) -> Option<usize> {
        self.glyphs.binary_search_by_key(&id, |g| g.id).ok()
    }

    pub fn glyph(&self, id: GlyphId) -> Result<&VirtualGlyph> {
        self.glyph_index(id)
            .map(|i| &self.glyphs[i])
            .ok_or_else(|| EngineError::UnknownGlyph(id.to_string()))
    }

    pub fn glyph_mut(&mut self, id: GlyphId) -> Result<&mut VirtualGlyph> {
        match self.glyph_index(id) {
            Some(i) => Ok(&mut self.glyphs[i]),
            None => Err(EngineError::UnknownGlyph(id.to_string())),
        }
    }

    pub fn collection(&self, id: &str) -> Result<&Collection> {
        self.collections
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| EngineError::UnknownCollection(id.to_string()))
    }

    pub fn collection_of(&self, glyph: GlyphId) -> Option<&Collection> {
        self.collections.iter().find(|c| c.members.contains(&glyph))
    }

    pub fn real_object(&self, id: &str) -> Result<&RealObject> {
        self.real_objects
            .iter()
            .find(|o| o.id == id)
            .ok_or_else(|| EngineError::UnknownObject(id.to_string()))
    }

    /// Creates one glyph per row selected by `filter`, in row-id order, laid
    /// out on a small row-major grid so they do not coincide.
    pub fn instantiate_glyphs(
        &mut self,
        filter: &RowFilter,
        template_id: &str,
    ) -> Result<Vec<GlyphId>> {
        self.template(template_id)?;
        let rows = filter.select(&self.table)?;
        if rows.is_empty() {
            return Err(EngineError::EmptySelection);
        }
        let mut created = Vec::with_capacity(rows.len());
        self.glyphs.reserve(rows.len());
        for row_id in rows {
            let seq = self.next_glyph_id;
            self.next_glyph_id += 1;
            let id = GlyphId(seq);
            self.glyphs.push(VirtualGlyph {
                id,
                row_id,
                template_id: template_id.to_string(),
                translation: grid_position(seq),
                rotation: Rotation::identity(),
                channel_values: BTreeMap::new(),
            });
            created.push(id);
        }
        Ok(created)
    }

    pub fn group_collection(
        &mut self,
        id: Option<String>,
        glyph_ids: &[GlyphId],
        grouping_key: Option<String>,
    ) -> Result<&Collection> {
        if glyph_ids.is_empty() {
            return Err(EngineError::EmptyCollection(
                id.unwrap_or_else(|| "<new>".into()),
            ));
        }
        if let Some(key) = &grouping_key {
            self.table.attribute(key)?;
        }
        let id = id.unwrap_or_else(|| self.fresh_collection_id());
        if self.collections.iter().any(|c| c.id == id) {
            return Err(EngineError::InvalidArgument(format!(
                "collection id '{id}' already exists"
            )));
        }
        let mut seen = HashSet::new();
        for g in glyph_ids {
            self.glyph(*g)?;
            if let Some(c) = self.collection_of(*g) {
                return Err(EngineError::GlyphAlreadyCollected(g.to_string(), c.id.clone()));
            }
            if !seen.insert(*g) {
                return Err(EngineError::GlyphAlreadyCollected(g.to_string(), id.clone()));
            }
        }
        self.collections.push(Collection {
            id,
            members: glyph_ids.to_vec(),
            grouping_key,
        });
        Ok(self.collections.last().expect("just pushed"))
    }

    fn fresh_collection_id(&self) -> String {
        (1..)
            .map(|n| format!("c{n}"))
            .find(|cand| self.collections.iter().all(|c| &c.id != cand))
            .expect("unbounded")
    }

    pub fn glyphs_with_template(&self, template_id: &str) -> Vec<GlyphId> {
        self.glyphs
            .iter()
            .filter(|g| g.template_id == template_id)
            .map(|g| g.id)
            .collect()
    }

    /// Glyphs whose row carries a value for `attribute`.
    pub fn glyphs_with_attribute(&self, attribute: &str) -> Result<Vec<GlyphId>> {
        let col = self
            .table
            .attribute_index(attribute)
            .ok_or_else(|| EngineError::UnknownAttribute(attribute.to_string()))?;
        Ok(self
            .glyphs
            .iter()
            .filter(|g| {
                self.table
                    .value(g.row_id, col)
                    .is_some_and(|v| !v.is_missing())
            })
            .map(|g| g.id)
            .collect())
    }

    pub fn mapping(&self, attribute: &str, channel: VisualChannel) -> Option<&VisualMapping> {
        self.mappings
            .iter()
            .find(|m| m.attribute == attribute && m.channel == channel)
    }

    /// Checks every cross reference and per-type invariant.
    pub fn validate_integrity(&self) -> Result<()> {
        let fail = |msg: String| Err(EngineError::IntegrityViolation(msg));
        self.table.validate().map_err(|e| match e {
            EngineError::IntegrityViolation(m) => EngineError::IntegrityViolation(m),
            other => EngineError::IntegrityViolation(other.to_string()),
        })?;
        for (key, t) in &self.templates {
            if key != &t.id {
                return fail(format!("template key '{key}' does not match id '{}'", t.id));
            }
            t.validate()
                .map_err(|e| EngineError::IntegrityViolation(e.to_string()))?;
        }
        let mut last: Option<GlyphId> = None;
        for g in &self.glyphs {
            if last.is_some_and(|l| g.id <= l) {
                return fail(format!("glyph ids not unique/ascending at {}", g.id));
            }
            last = Some(g.id);
            if g.id.0 >= self.next_glyph_id {
                return fail(format!("glyph {} beyond id counter", g.id));
            }
            if self.table.row(g.row_id).is_none() {
                return fail(format!("glyph {} references unknown row {}", g.id, g.row_id));
            }
            if !self.templates.contains_key(&g.template_id) {
                return fail(format!(
                    "glyph {} references unknown template '{}'",
                    g.id, g.template_id
                ));
            }
            if (g.rotation.quaternion().norm() - 1.0).abs() > QUAT_NORM_TOLERANCE {
                return fail(format!("glyph {} rotation is not unit", g.id));
            }
            if g.channel_values.values().any(|v| !v.is_finite()) {
                return fail(format!("glyph {} has a non-finite channel value", g.id));
            }
        }
        let mut owner: HashMap<GlyphId, &str> = HashMap::new();
        let mut coll_ids = HashSet::new();
        for c in &self.collections {
            if !coll_ids.insert(c.id.as_str()) {
                return fail(format!("duplicate collection id '{}'", c.id));
            }
            if c.members.is_empty() {
                return fail(format!("collection '{}' is empty", c.id));
            }
            for m in &c.members {
                if self.glyph_index(*m).is_none() {
                    return fail(format!("collection '{}' references unknown glyph {m}", c.id));
                }
                if let Some(prev) = owner.insert(*m, &c.id) {
                    return fail(format!(
                        "glyph {m} is in collections '{prev}' and '{}'",
                        c.id
                    ));
                }
            }
            if let Some(k) = &c.grouping_key {
                if self.table.attribute_index(k).is_none() {
                    return fail(format!("collection '{}' groups by unknown attribute '{k}'", c.id));
                }
            }
        }
        let mut pairs = HashSet::new();
        for m in &self.mappings {
            if self.table.attribute_index(&m.attribute).is_none() {
                return fail(format!("mapping references unknown attribute '{}'", m.attribute));
            }
            if !pairs.insert((m.attribute.as_str(), m.channel)) {
                return fail(format!("duplicate mapping {} -> {}", m.attribute, m.channel));
            }
            if !(m.scale > 0.0 && m.scale.is_finite()) {
                return fail(format!("mapping {} -> {} has scale {}", m.attribute, m.channel, m.scale));
            }
        }
        let mut object_ids = HashSet::new();
        let mut detection = HashSet::new();
        for o in &self.real_objects {
            if !object_ids.insert(o.id.as_str()) {
                return fail(format!("duplicate real object id '{}'", o.id));
            }
            o.validate()
                .map_err(|e| EngineError::IntegrityViolation(e.to_string()))?;
            if let Some(ix) = o.detection_index {
                if !detection.insert(ix) {
                    return fail(format!("duplicate detection index {ix}"));
                }
            }
        }
        self.view
            .validate()
            .map_err(|e| EngineError::IntegrityViolation(e.to_string()))?;
        if let Some(f) = &self.frame {
            f.validate()
                .map_err(|e| EngineError::IntegrityViolation(e.to_string()))?;
        }
        Ok(())
    }
}

pub fn grid_position(seq: u64) -> Vec3 {
    vec3(
        (seq % GRID_COLUMNS) as f64 * GRID_SPACING,
        0.0,
        (seq / GRID_COLUMNS) as f64 * GRID_SPACING,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::data::{AttributeType, DataAttribute, DataValue};

    fn scene(n: usize) -> Scene {
        let table = DataTable::new(
            vec![
                DataAttribute::categorical("kind", AttributeType::Nominal, ["phone", "other"])
                    .unwrap(),
            ],
            (0..n)
                .map(|_| vec![DataValue::Category("phone".into())])
                .collect(),
        )
        .unwrap();
        let mut s = Scene::new(table);
        let mut house = GlyphTemplate::cube();
        house.id = "house".into();
        s.add_template(house).unwrap();
        s
    }

    #[test]
    fn instantiate_one_glyph_per_row() {
        let mut s = scene(3);
        let ids = s.instantiate_glyphs(&RowFilter::All, "house").unwrap();
        assert_eq!(ids.len(), 3);
        let rows: Vec<u64> = s.glyphs.iter().map(|g| g.row_id).collect();
        assert_eq!(rows, vec![0, 1, 2]);
        assert_eq!(s.glyphs[0].translation, vec3(0.0, 0.0, 0.0));
        assert!(s.glyphs.iter().all(|g| g.rotation == Rotation::identity()));
        assert!(s.glyphs.iter().all(|g| g.channel_values.is_empty()));
        s.validate_integrity().unwrap();
    }

    #[test]
    fn eight_phones() {
        let mut s = scene(8);
        let ids = s
            .instantiate_glyphs(&RowFilter::parse("kind=phone").unwrap(), "house")
            .unwrap();
        assert_eq!(ids.len(), 8);
        let distinct: HashSet<_> = s
            .glyphs
            .iter()
            .map(|g| (g.translation.x.to_bits(), g.translation.z.to_bits()))
            .collect();
        assert_eq!(distinct.len(), 8);
    }

    #[test]
    fn empty_selection_and_unknown_template() {
        let mut s = scene(2);
        assert_eq!(
            s.instantiate_glyphs(&RowFilter::parse("kind=other").unwrap(), "house"),
            Err(EngineError::EmptySelection)
        );
        assert!(matches!(
            s.instantiate_glyphs(&RowFilter::All, "shoe"),
            Err(EngineError::UnknownTemplate(_))
        ));
    }

    #[test]
    fn grouping_rejects_regrouping() {
        let mut s = scene(2);
        let ids = s.instantiate_glyphs(&RowFilter::All, "house").unwrap();
        let c = s.group_collection(None, &ids, None).unwrap();
        assert_eq!(c.id, "c1");
        assert_eq!(c.members, ids);
        let err = s.group_collection(None, &ids[..1], None).unwrap_err();
        assert_eq!(err.code(), "GlyphAlreadyCollected");
        let err = s.group_collection(None, &[GlyphId(99)], None).unwrap_err();
        assert_eq!(err.code(), "UnknownGlyph");
        s.validate_integrity().unwrap();
    }

    #[test]
    fn snapshot_is_detached() {
        let mut s = scene(1);
        s.instantiate_glyphs(&RowFilter::All, "house").unwrap();
        let snap = s.snapshot();
        s.glyphs[0].translation.x = 5.0;
        assert_eq!(snap.glyphs[0].translation.x, 0.0);
        assert_eq!(s.snapshot(), s.snapshot());
        assert_eq!(Scene::default().snapshot(), Scene::default());
    }

    #[test]
    fn view_pose_invariants() {
        assert!(ViewPose::new(vec3(0., 0., 0.), vec3(0., 0., -1.), vec3(0., 1., 0.)).is_ok());
        assert!(ViewPose::new(vec3(0., 0., 0.), vec3(0., 0., -2.), vec3(0., 1., 0.)).is_err());
        assert!(ViewPose::new(vec3(0., 0., 0.), vec3(0., 0., -1.), vec3(0., 0.6, 0.8)).is_err());
        let v = ViewPose::looking(vec3(0., 1., 1.), vec3(0., -1., -1.), vec3(0., 1., 0.)).unwrap();
        assert!(v.forward.dot(&v.up).abs() < 1e-12);
    }

    #[test]
    fn glyph_id_text_form() {
        assert_eq!(GlyphId(7).to_string(), "g7");
        assert_eq!("g7".parse::<GlyphId>().unwrap(), GlyphId(7));
        assert_eq!("7".parse::<GlyphId>().unwrap(), GlyphId(7));
        assert!("gx".parse::<GlyphId>().is_err());
    }
}
