//! Context-aware validation of visual channels.
//!
//! Every rule yields a [`Verdict`]; a [`ValidationReport`] collects the
//! verdicts of all rules applicable to one (attribute, channel) pair. Reports
//! are advisory: nothing here mutates a scene or blocks a mapping.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::geometry::{Rotation, Vec3};
use crate::mapping::{encode, VisualChannel, VisualMapping};
use crate::model::{GlyphId, GlyphTemplate, Scene, VirtualGlyph, ViewPose};
use crate::reality::CameraFrame;

/// A length is invalid when its axis is more depth-aligned than screen-aligned.
pub const DEPTH_THRESHOLD: f64 = FRAC_1_SQRT_2;
/// Minimum glyph/background luminance contrast ratio.
pub const MIN_CONTRAST_RATIO: f64 = 3.0;
/// Rotational symmetry order at which angle channels become unreadable.
pub const SYMMETRY_LIMIT: u32 = 4;
/// Surround ring half-width as a fraction of the footprint diagonal.
pub const SURROUND_DILATION: f64 = 0.5;
/// Flare term added to both luminances in the contrast ratio.
pub const FLARE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Orientation,
    Contrast,
    Symmetry,
    Separability,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Orientation => "orientation",
            Rule::Contrast => "contrast",
            Rule::Symmetry => "symmetry",
            Rule::Separability => "separability",
        })
    }
}

impl std::str::FromStr for Rule {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orientation" => Ok(Rule::Orientation),
            "contrast" => Ok(Rule::Contrast),
            "symmetry" => Ok(Rule::Symmetry),
            "separability" => Ok(Rule::Separability),
            other => Err(EngineError::Parse(format!("unknown rule '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub rule: Rule,
    pub valid: bool,
    /// Depth fraction, contrast ratio, symmetry order, or 0 for separability.
    pub metric: f64,
    pub message: String,
    /// RMS contrast (sigma / mu) over the footprint and its surround.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rms_contrast: Option<f64>,
}

impl Verdict {
    fn new(rule: Rule, valid: bool, metric: f64, message: String) -> Self {
        Self {
            rule,
            valid,
            metric,
            message,
            rms_contrast: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub channel: VisualChannel,
    pub attribute: String,
    pub verdicts: Vec<Verdict>,
    pub overall_valid: bool,
}

impl ValidationReport {
    pub fn new(channel: VisualChannel, attribute: &str, verdicts: Vec<Verdict>) -> Self {
        let overall_valid = verdicts.iter().all(|v| v.valid);
        Self {
            channel,
            attribute: attribute.to_string(),
            verdicts,
            overall_valid,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.valid)
    }

    pub fn verdict(&self, rule: Rule) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.rule == rule)
    }
}

pub fn validate_orientation(channel: VisualChannel, view: &ViewPose) -> Result<Verdict> {
    validate_orientation_in_frame(channel, &Rotation::identity(), view)
}

/// Orientation rule for a glyph whose local axes are rotated by `rotation`.
pub fn validate_orientation_in_frame(
    channel: VisualChannel,
    rotation: &Rotation,
    view: &ViewPose,
) -> Result<Verdict> {
    if !(channel.is_length() || channel.is_area()) {
        return Err(EngineError::InapplicableRule {
            rule: Rule::Orientation.to_string(),
            channel: channel.to_string(),
        });
    }
    let depth = channel
        .spanned_axes()
        .into_iter()
        .map(|a| (rotation * a.unit()).dot(&view.forward).abs())
        .fold(0.0, f64::max);
    let valid = depth <= DEPTH_THRESHOLD;
    let message = if valid {
        format!("{channel} is screen-aligned (depth component {depth:.4})")
    } else {
        format!(
            "{channel} runs along the viewing direction (depth component {depth:.4} > {DEPTH_THRESHOLD:.4}); \
             perspective will distort it"
        )
    };
    Ok(Verdict::new(Rule::Orientation, valid, depth, message))
}

/// `(max + 0.05) / (min + 0.05)`; symmetric in its arguments.
pub fn contrast_ratio(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    (hi + FLARE) / (lo + FLARE)
}

pub fn contrast_verdict(glyph_luminance: f64, surround_luminance: f64) -> Verdict {
    let ratio = contrast_ratio(glyph_luminance, surround_luminance);
    let valid = ratio >= MIN_CONTRAST_RATIO;
    let message = if valid {
        format!("luminance contrast {ratio:.3}:1 meets {MIN_CONTRAST_RATIO}:1")
    } else {
        format!(
            "luminance contrast {ratio:.3}:1 is below {MIN_CONTRAST_RATIO}:1 \
             (glyph {glyph_luminance:.3} vs background {surround_luminance:.3})"
        )
    };
    Verdict::new(Rule::Contrast, valid, ratio, message)
}

/// Pixel-space axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelRect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl PixelRect {
    fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    fn dilate(&self, by: f64) -> Self {
        Self {
            x0: self.x0 - by,
            y0: self.y0 - by,
            x1: self.x1 + by,
            y1: self.y1 + by,
        }
    }

    fn diagonal(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }
}

/// Projected bounding rectangle of a glyph's oriented box.
pub fn glyph_footprint(
    glyph: &VirtualGlyph,
    template: &GlyphTemplate,
    frame: &CameraFrame,
) -> Result<PixelRect> {
    let ext = encode::extents(&glyph.channel_values, template);
    let rot = glyph.rotation * encode::angle_rotation(&glyph.channel_values);
    let mut rect = PixelRect {
        x0: f64::INFINITY,
        y0: f64::INFINITY,
        x1: f64::NEG_INFINITY,
        y1: f64::NEG_INFINITY,
    };
    for corner in 0..8u8 {
        let local = Vec3::new(
            if corner & 1 == 0 { -0.5 } else { 0.5 } * ext[0],
            if corner & 2 == 0 { 0.0 } else { 1.0 } * ext[1],
            if corner & 4 == 0 { -0.5 } else { 0.5 } * ext[2],
        );
        let world = glyph.translation + rot * local;
        let (px, py) = frame.project(&world).ok_or_else(|| {
            EngineError::FootprintOutOfFrame(format!("{} has a corner behind the camera", glyph.id))
        })?;
        rect.x0 = rect.x0.min(px);
        rect.y0 = rect.y0.min(py);
        rect.x1 = rect.x1.max(px);
        rect.y1 = rect.y1.max(py);
    }
    let (w, h) = (frame.cols as f64, frame.rows as f64);
    if rect.x0 < 0.0 || rect.y0 < 0.0 || rect.x1 > w || rect.y1 > h {
        return Err(EngineError::FootprintOutOfFrame(format!(
            "{} projects to [{:.2}, {:.2}] x [{:.2}, {:.2}] outside {w} x {h}",
            glyph.id, rect.x0, rect.x1, rect.y0, rect.y1
        )));
    }
    Ok(rect)
}

/// Mean background luminance in the surround ring and RMS contrast over the
/// dilated region, with the footprint filled by `glyph_luminance`.
pub fn surround_statistics(
    frame: &CameraFrame,
    footprint: &PixelRect,
    glyph_luminance: f64,
) -> Result<(f64, f64)> {
    if frame.luminance.is_empty() || frame.rows == 0 || frame.cols == 0 {
        return Err(EngineError::EmptyFrame);
    }
    let outer = footprint.dilate(SURROUND_DILATION * footprint.diagonal());
    let mut ring_sum = 0.0;
    let mut ring_n = 0usize;
    let mut union = Vec::new();
    for r in 0..frame.rows {
        let cy = r as f64 + 0.5;
        if cy < outer.y0 || cy > outer.y1 {
            continue;
        }
        for c in 0..frame.cols {
            let cx = c as f64 + 0.5;
            if !outer.contains(cx, cy) {
                continue;
            }
            if footprint.contains(cx, cy) {
                union.push(glyph_luminance);
            } else {
                let v = frame.sample(r, c);
                ring_sum += v;
                ring_n += 1;
                union.push(v);
            }
        }
    }
    if ring_n == 0 {
        return Err(EngineError::FootprintOutOfFrame(
            "surround ring contains no frame samples".into(),
        ));
    }
    let mean = union.iter().sum::<f64>() / union.len() as f64;
    let var = union.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / union.len() as f64;
    let rms = if mean > 0.0 { var.sqrt() / mean } else { 0.0 };
    Ok((ring_sum / ring_n as f64, rms))
}

/// Luminance contrast between a glyph and the real-world background behind it.
pub fn validate_contrast(
    glyph: &VirtualGlyph,
    template: &GlyphTemplate,
    frame: &CameraFrame,
    light_estimate: f64,
) -> Result<Verdict> {
    if frame.luminance.is_empty() {
        return Err(EngineError::EmptyFrame);
    }
    let footprint = glyph_footprint(glyph, template, frame)?;
    let mu_g = template.material_luminance * light_estimate;
    let (mu_s, rms) = surround_statistics(frame, &footprint, mu_g)?;
    let mut v = contrast_verdict(mu_g, mu_s);
    v.rms_contrast = Some(rms);
    Ok(v)
}

pub fn validate_symmetry(channel: VisualChannel, template: &GlyphTemplate) -> Result<Verdict> {
    let axis = channel
        .angle_axis()
        .ok_or_else(|| EngineError::InapplicableRule {
            rule: Rule::Symmetry.to_string(),
            channel: channel.to_string(),
        })?;
    let order = template.symmetry_orders[match axis {
        crate::mapping::Axis::Y => 0,
        crate::mapping::Axis::X => 1,
        crate::mapping::Axis::Z => 2,
    }];
    let valid = order < SYMMETRY_LIMIT;
    let message = if valid {
        format!("'{}' has rotational symmetry order {order} about the {channel} axis", template.id)
    } else {
        format!(
            "'{}' looks the same after a {:.1} degree turn about the {channel} axis (order {order}); \
             angles will be hard to read",
            template.id,
            360.0 / order as f64
        )
    };
    Ok(Verdict::new(Rule::Symmetry, valid, order as f64, message))
}

/// Whether the separability rule has anything to say about `channel`.
pub fn separability_applies(channel: VisualChannel) -> bool {
    channel.size_kind().is_some()
        || matches!(channel, VisualChannel::ColorLuminance | VisualChannel::Opacity)
}

/// Why `requested` clashes with an already bound channel, if it does.
fn clash(requested: VisualChannel, bound: VisualChannel) -> Option<&'static str> {
    use crate::mapping::SizeKind::*;
    use VisualChannel::{ColorLuminance, Opacity};
    match (requested.size_kind(), bound.size_kind()) {
        (Some(Area(a, b)), Some(Length(l))) if l == a || l == b => Some("subsumption"),
        (Some(Length(l)), Some(Area(a, b))) if l == a || l == b => Some("subsumption"),
        (Some(Volume), Some(Length(_) | Area(..))) => Some("subsumption"),
        (Some(Length(_) | Area(..)), Some(Volume)) => Some("subsumption"),
        (Some(Length(_)), Some(Length(_))) => Some("integration"),
        _ => match (requested, bound) {
            (ColorLuminance, Opacity) | (Opacity, ColorLuminance) => Some("optical integration"),
            _ => None,
        },
    }
}

/// Subsumption and integration against channels already encoding OTHER
/// attributes. Double encoding of the same attribute is exempt.
pub fn validate_separability(
    channel: VisualChannel,
    attribute: &str,
    existing: &[VisualMapping],
) -> Verdict {
    let conflicts: Vec<String> = existing
        .iter()
        .filter(|m| m.attribute != attribute)
        .filter_map(|m| {
            clash(channel, m.channel)
                .map(|why| format!("{why} with {} (encoding '{}')", m.channel, m.attribute))
        })
        .collect();
    if conflicts.is_empty() {
        Verdict::new(
            Rule::Separability,
            true,
            0.0,
            format!("{channel} is separable from the channels in use"),
        )
    } else {
        Verdict::new(
            Rule::Separability,
            false,
            0.0,
            format!("{channel} interferes: {}", conflicts.join("; ")),
        )
    }
}

/// Runs every rule applicable to `channel`. Rule failures (including errors
/// such as an out-of-frame footprint) become invalid verdicts.
pub fn validate_all(
    channel: VisualChannel,
    attribute: &str,
    glyph: Option<GlyphId>,
    scene: &Scene,
) -> ValidationReport {
    let glyph = glyph.and_then(|id| scene.glyph(id).ok());
    let template = glyph.and_then(|g| scene.templates.get(&g.template_id));
    let flagged = |rule: Rule, e: EngineError| {
        Verdict::new(rule, false, 0.0, format!("{}: {e}", e.code()))
    };
    let mut verdicts = Vec::new();
    if channel.is_length() || channel.is_area() {
        let rotation = glyph.map_or(Rotation::identity(), |g| g.rotation);
        verdicts.push(
            validate_orientation_in_frame(channel, &rotation, &scene.view)
                .unwrap_or_else(|e| flagged(Rule::Orientation, e)),
        );
    }
    if channel.angle_axis().is_some() {
        if let Some(t) = template {
            verdicts.push(validate_symmetry(channel, t).unwrap_or_else(|e| flagged(Rule::Symmetry, e)));
        }
    }
    if channel.family() == crate::mapping::ChannelFamily::Optical {
        if let (Some(g), Some(t), Some(frame)) = (glyph, template, scene.frame.as_ref()) {
            verdicts.push(
                validate_contrast(g, t, frame, scene.light_estimate)
                    .unwrap_or_else(|e| flagged(Rule::Contrast, e)),
            );
        }
    }
    if separability_applies(channel) {
        let sharing: Vec<VisualMapping> = scene
            .mappings
            .iter()
            .filter(|m| scene.table.co_occur(&m.attribute, attribute))
            .cloned()
            .collect();
        verdicts.push(validate_separability(channel, attribute, &sharing));
    }
    ValidationReport::new(channel, attribute, verdicts)
}
