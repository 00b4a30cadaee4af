//! Stateful command executor with bounded undo/redo. Scripts, the CLI, the
//! HTTP service and the C ABI all drive the scene through [`Engine`].

use std::collections::{BTreeMap, VecDeque};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::autolayout::{Correspondence, JoinSpec};
use crate::command::{parse_line, ChannelChoice, Command, NoiseArgs};
use crate::error::{EngineError, Result};
use crate::layout::{PoseSample, Target};
use crate::mapping::BindOptions;
use crate::model::{GlyphTemplate, RowFilter, Scene, ViewPose};
use crate::nudging::{self, Rule, ValidationReport, Verdict};
use crate::persist::{self, ColumnSpec, GalleryClient, SceneDocument, TypeAnnotations};
use crate::reality::{detect, DetectionNoise, RealObject, RealityDocument};
use crate::sync::SyncRequest;

pub const DEFAULT_UNDO_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub rule: String,
    pub metric: f64,
    pub message: String,
}

impl Warning {
    fn from_verdict(v: &Verdict) -> Self {
        Self {
            rule: v.rule.to_string(),
            metric: v.metric,
            message: v.message.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub kind: String,
    pub object: String,
}

/// Result of one successful command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub command: String,
    pub lines: Vec<String>,
    pub data: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ValidationReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Warning>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<Event>,
}

impl Outcome {
    fn new(command: &Command) -> Self {
        Self {
            command: command.name().to_string(),
            lines: Vec::new(),
            data: Value::Null,
            report: None,
            warnings: Vec::new(),
            events: Vec::new(),
        }
    }

    fn line(mut self, s: impl Into<String>) -> Self {
        self.lines.push(s.into());
        self
    }

    fn data(mut self, v: Value) -> Self {
        self.data = v;
        self
    }

    fn with_report(mut self, report: ValidationReport) -> Self {
        self.warnings
            .extend(report.failures().map(Warning::from_verdict));
        self.report = Some(report);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
struct State {
    scene: Scene,
    extra: BTreeMap<String, Value>,
    ground_truth: Vec<RealObject>,
}

#[derive(Debug, Clone)]
pub struct Engine {
    state: State,
    undo: VecDeque<State>,
    redo: Vec<State>,
    undo_limit: usize,
    gallery: GalleryClient,
    base_dir: PathBuf,
    last_report: Option<ValidationReport>,
    applied: u64,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new(GalleryClient::from_env())
    }
}

impl Engine {
    pub fn new(gallery: GalleryClient) -> Self {
        Self {
            state: State {
                scene: Scene::default(),
                extra: BTreeMap::new(),
                ground_truth: Vec::new(),
            },
            undo: VecDeque::new(),
            redo: Vec::new(),
            undo_limit: DEFAULT_UNDO_LIMIT,
            gallery,
            base_dir: PathBuf::from("."),
            last_report: None,
            applied: 0,
        }
    }

    /// Relative paths in commands resolve against this directory.
    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }

    pub fn set_base_dir(&mut self, dir: impl Into<PathBuf>) {
        self.base_dir = dir.into();
    }

    pub fn with_undo_limit(mut self, limit: usize) -> Self {
        self.undo_limit = limit;
        self
    }

    pub fn scene(&self) -> &Scene {
        &self.state.scene
    }

    pub fn last_report(&self) -> Option<&ValidationReport> {
        self.last_report.as_ref()
    }

    /// Number of commands that have succeeded so far.
    pub fn applied_commands(&self) -> u64 {
        self.applied
    }

    pub fn can_undo(&self) -> bool {
        !self.undo.is_empty()
    }

    /// Current scene as a document, including preserved unknown fields.
    pub fn document(&self) -> SceneDocument {
        SceneDocument {
            format_version: persist::FORMAT_VERSION,
            scene: self.state.scene.clone(),
            extra: self.state.extra.clone(),
        }
    }

    pub fn load_document(&mut self, doc: SceneDocument) {
        self.state.scene = doc.scene;
        self.state.extra = doc.extra;
        self.state.ground_truth.clear();
    }

    pub fn execute_line(&mut self, line: &str) -> Result<Option<Outcome>> {
        match parse_line(line)? {
            Some(cmd) => self.execute(&cmd).map(Some),
            None => Ok(None),
        }
    }

    /// Runs one command. A failing command leaves the scene untouched.
    pub fn execute(&mut self, cmd: &Command) -> Result<Outcome> {
        let result = match cmd {
            Command::Undo => self.step(true, cmd),
            Command::Redo => self.step(false, cmd),
            _ => self.run(cmd),
        };
        if result.is_ok() {
            self.applied += 1;
        }
        result
    }

    fn run(&mut self, cmd: &Command) -> Result<Outcome> {
        let before = cmd.mutates().then(|| self.state.clone());
        match self.apply(cmd) {
            Ok(outcome) => {
                if let Some(before) = before {
                    if before != self.state {
                        self.undo.push_back(before);
                        while self.undo.len() > self.undo_limit {
                            self.undo.pop_front();
                        }
                        self.redo.clear();
                    }
                }
                if let Some(r) = &outcome.report {
                    self.last_report = Some(r.clone());
                }
                Ok(outcome)
            }
            Err(e) => {
                if let Some(before) = before {
                    self.state = before;
                }
                Err(e)
            }
        }
    }

    fn step(&mut self, undo: bool, cmd: &Command) -> Result<Outcome> {
        let from = if undo { self.undo.pop_back() } else { self.redo.pop() };
        let Some(prev) = from else {
            return Ok(Outcome::new(cmd).line("nothing to do").data(json!({"changed": false})));
        };
        let current = std::mem::replace(&mut self.state, prev);
        if undo {
            self.redo.push(current);
        } else {
            self.undo.push_back(current);
        }
        Ok(Outcome::new(cmd)
            .line(format!("{} applied", cmd.name()))
            .data(json!({"changed": true})))
    }

    fn apply(&mut self, cmd: &Command) -> Result<Outcome> {
        let out = Outcome::new(cmd);
        let base = self.base_dir.clone();
        let resolve = |p: &Path| resolve_in(&base, p);
        let scene = &mut self.state.scene;
        match cmd {
            Command::LoadData { path, types } => {
                let mut ann = TypeAnnotations::new();
                for t in types {
                    let (name, spec) = t.split_once('=').ok_or_else(|| {
                        EngineError::InvalidArgument(format!("--type expects NAME=SPEC, got '{t}'"))
                    })?;
                    ann.insert(name.to_string(), ColumnSpec::parse(spec)?);
                }
                let table = persist::load_csv(&resolve(path), &ann)?;
                let (rows, cols) = (table.rows.len(), table.attributes.len());
                let fresh = Scene {
                    table,
                    templates: std::mem::take(&mut scene.templates),
                    real_objects: std::mem::take(&mut scene.real_objects),
                    view: scene.view,
                    light_estimate: scene.light_estimate,
                    frame: scene.frame.take(),
                    ..Scene::default()
                };
                *scene = fresh;
                Ok(out
                    .line(format!("loaded {rows} rows x {cols} attributes"))
                    .data(json!({"rows": rows, "attributes": cols})))
            }
            Command::LoadReality { path, noise } => {
                let doc = RealityDocument::load(&resolve(path))?;
                let frame = doc.camera_frame();
                let detected = detect(&doc.objects, &frame, &noise_of(noise))?;
                let events: Vec<Event> = detected
                    .iter()
                    .map(|o| Event {
                        kind: "highlighted".into(),
                        object: o.id.clone(),
                    })
                    .collect();
                let ids: Vec<&str> = detected.iter().map(|o| o.id.as_str()).collect();
                let data = json!({"detected": ids, "ground_truth": doc.objects.len()});
                let msg = format!("detected {} of {} objects", detected.len(), doc.objects.len());
                scene.view = frame.pose;
                scene.light_estimate = doc.camera.light_estimate;
                scene.real_objects = detected;
                scene.frame = Some(frame);
                self.state.ground_truth = doc.objects;
                let mut out = out.line(msg).data(data);
                out.events = events;
                Ok(out)
            }
            Command::FetchGlyph { name } => {
                let template = match self.gallery.fetch_template(name) {
                    Ok(t) => t,
                    Err(EngineError::NetworkUnavailable(_)) if name == "cube" => GlyphTemplate::cube(),
                    Err(EngineError::NetworkUnavailable(_)) if name == "sphere" => {
                        GlyphTemplate::sphere()
                    }
                    Err(e) => return Err(e),
                };
                let data = serde_json::to_value(&template)?;
                scene.add_template(template)?;
                Ok(out.line(format!("template {name} ready")).data(data))
            }
            Command::Instantiate {
                template,
                filter,
                collection,
            } => {
                let ids = scene.instantiate_glyphs(&RowFilter::parse(filter)?, template)?;
                let mut out = out.line(format!(
                    "instantiated {} {template} glyphs ({}..{})",
                    ids.len(),
                    ids[0],
                    ids[ids.len() - 1]
                ));
                if let Some(c) = collection {
                    let c = scene.group_collection(Some(c.clone()), &ids, None)?;
                    out = out.line(format!("grouped into {}", c.id));
                }
                Ok(out.data(json!({"glyphs": ids})))
            }
            Command::Group {
                name,
                glyphs,
                template,
                key,
            } => {
                let members = match template {
                    Some(t) => {
                        scene.template(t)?;
                        scene.glyphs_with_template(t)
                    }
                    None => glyphs.clone(),
                };
                let c = scene.group_collection(name.clone(), &members, key.clone())?;
                Ok(out
                    .line(format!("collection {} with {} glyphs", c.id, c.members.len()))
                    .data(json!({"collection": c.id, "members": c.members})))
            }
            Command::Bind {
                attr,
                channel,
                scale,
                baseline,
                palette_seed,
            } => {
                let mut out = out;
                let channel = match channel {
                    ChannelChoice::Fixed(c) => *c,
                    ChannelChoice::Recommended => {
                        let r = scene.recommend(attr)?;
                        out = out.line(format!("recommended channel for {attr}: {}", r.channel));
                        r.channel
                    }
                };
                let opts = BindOptions {
                    scale: *scale,
                    baseline: *baseline,
                    palette_seed: *palette_seed,
                };
                let (m, report) = scene.bind(attr, channel, opts)?;
                Ok(out
                    .line(format!("bound {attr} -> {channel} (scale {})", m.scale))
                    .data(serde_json::to_value(&m)?)
                    .with_report(report))
            }
            Command::Unbind { attr, channel } => {
                let m = scene.unbind(attr, *channel)?;
                Ok(out
                    .line(format!("unbound {attr} -> {channel}"))
                    .data(serde_json::to_value(&m)?))
            }
            Command::Rescale {
                attr,
                channel,
                factor,
            } => {
                let (m, report) = scene.rescale(attr, *channel, *factor)?;
                Ok(out
                    .line(format!("{attr} -> {channel} scale now {}", m.scale))
                    .data(serde_json::to_value(&m)?)
                    .with_report(report))
            }
            Command::Nudge { attr } => {
                let ranked = scene.ranked_channels(attr)?;
                let rec = scene.recommend(attr)?;
                let mut out = out;
                for (i, r) in ranked.iter().enumerate() {
                    let status = if r.valid { "valid" } else { "invalid" };
                    let why: Vec<String> = r
                        .reasons
                        .iter()
                        .filter(|v| !v.valid)
                        .map(|v| format!("{} metric={}", v.rule, v.metric))
                        .collect();
                    let tail = if why.is_empty() {
                        String::new()
                    } else {
                        format!(" ({})", why.join(", "))
                    };
                    out = out.line(format!("{:>2}. {} {status}{tail}", i + 1, r.channel));
                }
                Ok(out
                    .line(format!("recommended: {}", rec.channel))
                    .data(json!({"ranked": ranked, "recommended": rec})))
            }
            Command::Check {
                rule,
                channel,
                attr,
                glyph,
            } => {
                let probe = match (glyph, attr) {
                    (Some(g), _) => Some(scene.glyph(*g)?),
                    (None, Some(a)) => scene
                        .glyphs_with_attribute(a)?
                        .first()
                        .and_then(|g| scene.glyph(*g).ok()),
                    (None, None) => None,
                };
                let need_glyph = || {
                    probe.ok_or_else(|| {
                        EngineError::InvalidArgument(format!("rule {rule} needs --glyph or --attr"))
                    })
                };
                let verdict = match rule {
                    Rule::Orientation => {
                        let rot = probe.map(|g| g.rotation).unwrap_or_default();
                        nudging::validate_orientation_in_frame(*channel, &rot, &scene.view)?
                    }
                    Rule::Symmetry => {
                        let g = need_glyph()?;
                        nudging::validate_symmetry(*channel, scene.template(&g.template_id)?)?
                    }
                    Rule::Contrast => {
                        let frame = scene.frame.as_ref().ok_or(EngineError::NoFrame)?;
                        let g = need_glyph()?;
                        nudging::validate_contrast(
                            g,
                            scene.template(&g.template_id)?,
                            frame,
                            scene.light_estimate,
                        )?
                    }
                    Rule::Separability => {
                        let a = attr.as_deref().ok_or_else(|| {
                            EngineError::InvalidArgument("separability needs --attr".into())
                        })?;
                        if !nudging::separability_applies(*channel) {
                            return Err(EngineError::InapplicableRule {
                                rule: rule.to_string(),
                                channel: channel.to_string(),
                            });
                        }
                        nudging::validate_separability(*channel, a, &scene.mappings)
                    }
                };
                let mut out = out
                    .line(format!(
                        "{rule} {channel}: {} metric={}",
                        if verdict.valid { "valid" } else { "invalid" },
                        verdict.metric
                    ))
                    .line(verdict.message.clone())
                    .data(serde_json::to_value(&verdict)?);
                if !verdict.valid {
                    out.warnings.push(Warning::from_verdict(&verdict));
                }
                Ok(out)
            }
            Command::View {
                position,
                forward,
                up,
            } => {
                scene.view = ViewPose::looking(*position, *forward, *up)?;
                Ok(out
                    .line("view updated")
                    .data(serde_json::to_value(scene.view)?))
            }
            Command::Sync {
                object,
                source,
                glyph,
                channel,
            } => {
                let res = scene.sync(&SyncRequest {
                    real_object_id: object.clone(),
                    source_channel: source.clone(),
                    target_glyph_id: *glyph,
                    target_channel: *channel,
                })?;
                let line = match &res.new_scale {
                    Some(s) => format!(
                        "synced {channel} of {glyph} to {} ({} glyphs, scale {s})",
                        res.value,
                        res.affected.len()
                    ),
                    None => format!(
                        "assigned {channel} = {} to {} glyphs",
                        res.value,
                        res.affected.len()
                    ),
                };
                Ok(out.line(line).data(serde_json::to_value(&res)?))
            }
            Command::Autolayout {
                mode,
                object_channel,
                attr,
                anchor,
                clearance,
                collection,
            } => {
                let spec = JoinSpec {
                    mode: (*mode).into(),
                    object_channel: object_channel.clone(),
                    data_attribute: attr.clone(),
                    anchor: (*anchor).into(),
                    clearance: *clearance,
                    collection: collection.clone(),
                };
                let c = scene.autolayout(&spec)?;
                let mut out = out.line(format!("placed {} glyphs", c.pairs.len()));
                if !c.unmatched_objects.is_empty() || !c.unmatched_glyphs.is_empty() {
                    let n = c.unmatched_objects.len() + c.unmatched_glyphs.len();
                    out.warnings.push(Warning {
                        rule: "autolayout".into(),
                        metric: n as f64,
                        message: format!(
                            "unmatched objects {:?}, unmatched glyphs {:?}",
                            c.unmatched_objects,
                            c.unmatched_glyphs.iter().map(ToString::to_string).collect::<Vec<_>>()
                        ),
                    });
                }
                Ok(out.data(serde_json::to_value(&c)?))
            }
            Command::Place {
                pairs,
                anchor,
                clearance,
            } => {
                let c: Correspondence = read_json(&resolve(pairs))?;
                scene.place(&c, (*anchor).into(), *clearance)?;
                Ok(out.line(format!("placed {} glyphs", c.pairs.len())))
            }
            Command::Move { glyph, du, dv } => {
                scene.move_on_plane(*glyph, *du, *dv)?;
                let t = scene.glyph(*glyph)?.translation;
                Ok(out
                    .line(format!("{glyph} at ({}, {}, {})", t.x, t.y, t.z))
                    .data(json!({"translation": [t.x, t.y, t.z]})))
            }
            Command::Pick {
                glyph,
                collection,
                distance,
            } => {
                let target = match (glyph, collection) {
                    (Some(g), _) => Target::Glyph(*g),
                    (None, Some(c)) => Target::Collection(c.clone()),
                    (None, None) => {
                        return Err(EngineError::InvalidArgument(
                            "pick needs --glyph or --collection".into(),
                        ))
                    }
                };
                let pose = scene.view;
                let d = scene.place_at_pose(&target, &pose, *distance)?;
                Ok(out
                    .line(format!("moved by ({}, {}, {})", d.x, d.y, d.z))
                    .data(json!({"delta": [d.x, d.y, d.z]})))
            }
            Command::Sketch {
                collection,
                path,
                plane_y,
            } => {
                let file: SketchFile = read_json(&resolve(path))?;
                let frame = scene.frame.clone().ok_or(EngineError::NoFrame)?;
                let y = plane_y.or(file.plane_y).unwrap_or(0.0);
                scene.layout_sketch(collection, &file.screen_points, &frame, y)?;
                Ok(out.line(format!("sketched {collection} on y = {y}")))
            }
            Command::Brush {
                collection,
                path,
                reach,
            } => {
                let file: BrushFile = read_json(&resolve(path))?;
                scene.layout_brush(collection, &file.trace, *reach)?;
                Ok(out.line(format!("brushed {collection} along {} samples", file.trace.len())))
            }
            Command::CopyLayout {
                source,
                target,
                offset,
            } => {
                let res = scene.copy_layout(source, target, *offset)?;
                let o = res.offset;
                let mut out = out
                    .line(format!("copied {source} -> {target} offset ({}, {}, {})", o.x, o.y, o.z))
                    .data(serde_json::to_value(&res)?);
                if res.overlap {
                    out.warnings.push(Warning {
                        rule: "copy_layout".into(),
                        metric: 0.0,
                        message: format!("{target} now overlaps {source} exactly"),
                    });
                }
                Ok(out)
            }
            Command::Stack { collection } => {
                let n = scene.stack_snap(collection)?;
                Ok(out
                    .line(format!("{n} stacks in {collection}"))
                    .data(json!({"stacks": n})))
            }
            Command::Export { path } => {
                let text = persist::export_scene(scene, &resolve(path))?;
                Ok(out
                    .line(format!("exported {} nodes to {}", scene.glyphs.len(), path.display()))
                    .data(json!({"bytes": text.len()})))
            }
            Command::Save { path } => {
                self.document().save(&resolve(path))?;
                Ok(out.line(format!("saved {}", path.display())))
            }
            Command::Load { path } => {
                let doc = SceneDocument::load(&resolve(path))?;
                self.load_document(doc);
                Ok(out.line(format!("loaded {}", path.display())))
            }
            Command::Undo | Command::Redo => unreachable!("handled by execute"),
        }
    }
}

fn resolve_in(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn noise_of(n: &NoiseArgs) -> DetectionNoise {
    DetectionNoise {
        extent_relative_sigma: n.extent_sigma,
        position_sigma_m: n.position_sigma,
        drop_probability: n.drop,
        seed: n.seed,
    }
}

#[derive(Debug, Deserialize)]
struct SketchFile {
    screen_points: Vec<[f64; 2]>,
    #[serde(default)]
    plane_y: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct BrushFile {
    trace: Vec<PoseSample>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(EngineError::EmptyFile(path.display().to_string()));
    }
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine_with_data() -> (Engine, tempfile::TempDir) {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("d.csv"), "name:nom,cost:quant\na,1\nb,3\n").unwrap();
        let mut e = Engine::new(GalleryClient::new(None, dir.path().join("cache")))
            .with_base_dir(dir.path());
        for line in ["load-data d.csv", "fetch-glyph cube", "instantiate --template cube --collection all"] {
            e.execute_line(line).unwrap();
        }
        (e, dir)
    }

    #[test]
    fn undo_redo_restore_snapshots() {
        let (mut e, _dir) = engine_with_data();
        let before = e.scene().clone();
        e.execute_line("bind --attr cost --channel length_y").unwrap();
        let after = e.scene().clone();
        assert_ne!(before, after);
        e.execute_line("undo").unwrap();
        assert_eq!(e.scene(), &before);
        e.execute_line("redo").unwrap();
        assert_eq!(e.scene(), &after);
    }

    #[test]
    fn failed_command_changes_nothing() {
        let (mut e, _dir) = engine_with_data();
        let before = e.scene().clone();
        let err = e.execute_line("bind --attr nope --channel length_y").unwrap_err();
        assert_eq!(err.code(), "UnknownAttribute");
        assert_eq!(e.scene(), &before);
    }

    #[test]
    fn advisory_warnings() {
        let (mut e, _dir) = engine_with_data();
        let out = e.execute_line("bind --attr cost --channel length_z").unwrap().unwrap();
        assert!(out.warnings.iter().any(|w| w.rule == "orientation"));
        assert_eq!(e.scene().mappings.len(), 1);
    }

    #[test]
    fn undo_is_bounded() {
        let (e, _dir) = engine_with_data();
        let mut e = e.with_undo_limit(2);
        e.execute_line("bind --attr cost --channel length_y").unwrap();
        for _ in 0..3 {
            e.execute_line("rescale --attr cost --channel length_y --factor 2").unwrap();
        }
        e.execute_line("undo").unwrap();
        e.execute_line("undo").unwrap();
        let out = e.execute_line("undo").unwrap().unwrap();
        assert_eq!(out.data["changed"], false);
    }

    #[test]
    fn recommended_bind() {
        let (mut e, _dir) = engine_with_data();
        let out = e.execute_line("bind --attr cost --channel recommended").unwrap().unwrap();
        assert_eq!(out.data["channel"], "length_x");
    }
}
