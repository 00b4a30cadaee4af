use std::collections::BTreeMap;

use nalgebra::Vector3;

use super::channel::{ChannelFamily, SizeKind, VisualChannel};
use super::VisualMapping;
use crate::error::{EngineError, Result};
use crate::geometry::Rotation;
use crate::model::{DataAttribute, DataValue, GlyphTemplate, Hsl};

/// Hue span used for quantitative data on `color_hue`; stops short of a full
/// turn so the extremes stay distinguishable.
pub const QUANT_HUE_SPAN: f64 = 300.0;

/// Encodes one data value into a channel value.
///
/// Sizes are ratio-linear (meters, m², m³), angles are ratio-linear degrees
/// wrapped into `[0, 360)`, luminance/saturation/opacity are affine from the
/// baseline and clamped to `[0, 1]`, categorical hue spreads K categories
/// evenly around the wheel starting at the palette seed.
pub fn encode(value: &DataValue, mapping: &VisualMapping, attribute: &DataAttribute) -> Result<f64> {
    if !attribute.conforms(value) || value.is_missing() {
        return Err(EngineError::DomainViolation {
            attribute: attribute.name.clone(),
            value: value.to_string(),
        });
    }
    let x = attribute
        .numeric(value)
        .ok_or_else(|| EngineError::DomainViolation {
            attribute: attribute.name.clone(),
            value: value.to_string(),
        })?;
    let channel = mapping.channel;
    match channel.family() {
        ChannelFamily::Size => {
            if x < 0.0 {
                return Err(EngineError::NegativeSizeDomain {
                    attribute: attribute.name.clone(),
                    channel: channel.to_string(),
                    value: x,
                });
            }
            Ok(mapping.scale * x)
        }
        ChannelFamily::Angle => Ok(wrap_degrees(mapping.scale * x)),
        ChannelFamily::Optical if channel == VisualChannel::ColorHue => {
            let seed = mapping.palette_seed as f64;
            match attribute.category_count() {
                Some(k_total) => Ok(wrap_degrees(seed + x * 360.0 / k_total as f64)),
                None => Ok(wrap_degrees(
                    seed + mapping.scale * normalized_position(x, attribute) * QUANT_HUE_SPAN,
                )),
            }
        }
        ChannelFamily::Optical => {
            let t = normalized_position(x, attribute);
            Ok((mapping.baseline + mapping.scale * t).clamp(0.0, 1.0))
        }
    }
}

/// `(x - min) / (max - min)`, or 0.5 for a degenerate domain.
pub fn normalized_position(x: f64, attribute: &DataAttribute) -> f64 {
    let (min, max) = attribute.numeric_bounds();
    if max == min {
        0.5
    } else {
        (x - min) / (max - min)
    }
}

pub fn wrap_degrees(d: f64) -> f64 {
    let w = d.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs.
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Base measure of a size channel on a template: extent, face area or volume.
pub fn base_measure(kind: SizeKind, base: &[f64; 3]) -> f64 {
    match kind {
        SizeKind::Length(a) => base[a.index()],
        SizeKind::Area(a, b) => base[a.index()] * base[b.index()],
        SizeKind::Volume => base.iter().product(),
    }
}

/// Scale chosen at bind time: the largest data value maps to the template's
/// base measure (size), to 270 degrees (angle) or to 1.0 (normalized).
pub fn default_scale(
    channel: VisualChannel,
    attribute: &DataAttribute,
    reference: Option<&GlyphTemplate>,
    baseline: f64,
) -> f64 {
    let (_, max) = attribute.numeric_bounds();
    match channel.family() {
        ChannelFamily::Size => {
            let kind = channel.size_kind().expect("size channel");
            let base = reference.map_or(1.0, |t| base_measure(kind, &t.base_extents));
            if max > 0.0 {
                base / max
            } else {
                1.0
            }
        }
        ChannelFamily::Angle => {
            if max > 0.0 {
                270.0 / max
            } else {
                1.0
            }
        }
        // categorical hue ignores the scale; quantitative hue spans QUANT_HUE_SPAN
        ChannelFamily::Optical if channel == VisualChannel::ColorHue => 1.0,
        ChannelFamily::Optical => (1.0 - baseline).max(f64::MIN_POSITIVE),
    }
}

/// Per-axis scale factors a glyph's size channel values apply to its
/// template. Multiple size channels compose multiplicatively.
pub fn scale_factors(values: &BTreeMap<VisualChannel, f64>, template: &GlyphTemplate) -> [f64; 3] {
    let base = &template.base_extents;
    let mut f = [1.0f64; 3];
    for (channel, v) in values {
        match channel.size_kind() {
            Some(SizeKind::Length(a)) => f[a.index()] *= v / base[a.index()],
            Some(SizeKind::Area(a, b)) => {
                let k = (v / (base[a.index()] * base[b.index()])).sqrt();
                f[a.index()] *= k;
                f[b.index()] *= k;
            }
            Some(SizeKind::Volume) => {
                let k = (v / template.base_volume()).cbrt();
                f.iter_mut().for_each(|x| *x *= k);
            }
            None => {}
        }
    }
    f
}

pub fn extents(values: &BTreeMap<VisualChannel, f64>, template: &GlyphTemplate) -> [f64; 3] {
    let f = scale_factors(values, template);
    [
        template.base_extents[0] * f[0],
        template.base_extents[1] * f[1],
        template.base_extents[2] * f[2],
    ]
}

/// Rotation contributed by the angle channels: about y, then x, then z.
pub fn angle_rotation(values: &BTreeMap<VisualChannel, f64>) -> Rotation {
    let angle = |c| values.get(&c).copied().unwrap_or(0.0).to_radians();
    let phi = Rotation::from_axis_angle(&Vector3::y_axis(), angle(VisualChannel::AnglePhi));
    let theta = Rotation::from_axis_angle(&Vector3::x_axis(), angle(VisualChannel::AngleTheta));
    let psi = Rotation::from_axis_angle(&Vector3::z_axis(), angle(VisualChannel::AnglePsi));
    phi * theta * psi
}

pub fn color(values: &BTreeMap<VisualChannel, f64>, template: &GlyphTemplate) -> (Hsl, f64) {
    let mut c = template.base_color;
    if let Some(h) = values.get(&VisualChannel::ColorHue) {
        c.h = *h;
    }
    if let Some(s) = values.get(&VisualChannel::ColorSaturation) {
        c.s = *s;
    }
    if let Some(l) = values.get(&VisualChannel::ColorLuminance) {
        c.l = *l;
    }
    let opacity = values.get(&VisualChannel::Opacity).copied().unwrap_or(1.0);
    (c, opacity)
}
