//! Attribute-to-channel bindings and their global propagation.
//!
//! A [`VisualMapping`] applies to every glyph whose row carries the
//! attribute, whatever its template. Every mutation here re-encodes all
//! affected glyphs before returning.

mod channel;
pub mod encode;
pub mod ranking;

use serde::{Deserialize, Serialize};

pub use channel::{Axis, ChannelFamily, SizeKind, VisualChannel};
pub use ranking::{effectiveness_order, RankedChannel, Recommendation};

use crate::error::{EngineError, Result};
use crate::model::{AttributeType, GlyphId, Scene};
use crate::nudging::{self, ValidationReport};

pub const DEFAULT_BASELINE: f64 = 0.15;

fn default_baseline() -> f64 {
    DEFAULT_BASELINE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualMapping {
    pub attribute: String,
    pub channel: VisualChannel,
    pub scale: f64,
    #[serde(default = "default_baseline")]
    pub baseline: f64,
    #[serde(default)]
    pub palette_seed: i64,
}

impl VisualMapping {
    pub fn new(attribute: impl Into<String>, channel: VisualChannel, scale: f64) -> Self {
        Self {
            attribute: attribute.into(),
            channel,
            scale,
            baseline: DEFAULT_BASELINE,
            palette_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BindOptions {
    pub scale: Option<f64>,
    pub baseline: Option<f64>,
    pub palette_seed: Option<i64>,
}

impl Scene {
    fn mapping_index(&self, attribute: &str, channel: VisualChannel) -> Result<usize> {
        self.mappings
            .iter()
            .position(|m| m.attribute == attribute && m.channel == channel)
            .ok_or_else(|| EngineError::UnknownMapping(attribute.to_string(), channel.to_string()))
    }

    /// Creates a mapping and encodes every glyph carrying the attribute. The
    /// returned report is advisory; a failing verdict never prevents the bind.
    pub fn bind(
        &mut self,
        attribute: &str,
        channel: VisualChannel,
        options: BindOptions,
    ) -> Result<(VisualMapping, ValidationReport)> {
        let attr = self.table.attribute(attribute)?.clone();
        if attr.kind == AttributeType::Nominal && channel != VisualChannel::ColorHue {
            return Err(EngineError::NominalChannelUnsupported(
                attribute.to_string(),
                channel.to_string(),
            ));
        }
        if self.mapping(attribute, channel).is_some() {
            return Err(EngineError::DuplicateMapping(
                attribute.to_string(),
                channel.to_string(),
            ));
        }
        if channel.family() == ChannelFamily::Size {
            let (min, _) = attr.numeric_bounds();
            if min < 0.0 {
                return Err(EngineError::NegativeSizeDomain {
                    attribute: attribute.to_string(),
                    channel: channel.to_string(),
                    value: min,
                });
            }
        }
        let carriers = self.glyphs_with_attribute(attribute)?;
        self.check_channel_free(attribute, channel, &carriers)?;

        let baseline = options.baseline.unwrap_or(DEFAULT_BASELINE);
        let scale = match options.scale {
            Some(s) if !(s > 0.0 && s.is_finite()) => return Err(EngineError::NonPositiveFactor(s)),
            Some(s) => s,
            None => {
                let reference = carriers
                    .first()
                    .and_then(|g| self.glyph(*g).ok())
                    .and_then(|g| self.templates.get(&g.template_id));
                encode::default_scale(channel, &attr, reference, baseline)
            }
        };
        let mapping = VisualMapping {
            attribute: attribute.to_string(),
            channel,
            scale,
            baseline,
            palette_seed: options.palette_seed.unwrap_or(0),
        };
        self.apply_mapping(&mapping, &carriers)?;
        self.mappings.push(mapping.clone());
        let report = self.record_report(attribute, channel, carriers.first().copied());
        Ok((mapping, report))
    }

    /// Multiplies a mapping's scale and re-encodes every bound glyph.
    pub fn rescale(
        &mut self,
        attribute: &str,
        channel: VisualChannel,
        factor: f64,
    ) -> Result<(VisualMapping, ValidationReport)> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(EngineError::NonPositiveFactor(factor));
        }
        let ix = self.mapping_index(attribute, channel)?;
        let scale = self.mappings[ix].scale * factor;
        self.set_scale(attribute, channel, scale)
    }

    /// Replaces a mapping's scale and re-encodes every bound glyph.
    pub fn set_scale(
        &mut self,
        attribute: &str,
        channel: VisualChannel,
        scale: f64,
    ) -> Result<(VisualMapping, ValidationReport)> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(EngineError::NonPositiveFactor(scale));
        }
        let ix = self.mapping_index(attribute, channel)?;
        let mut mapping = self.mappings[ix].clone();
        mapping.scale = scale;
        let carriers = self.glyphs_with_attribute(attribute)?;
        self.apply_mapping(&mapping, &carriers)?;
        self.mappings[ix] = mapping.clone();
        let report = self.record_report(attribute, channel, carriers.first().copied());
        Ok((mapping, report))
    }

    /// Removes a mapping and its channel value from every bound glyph, so
    /// they fall back to template defaults.
    pub fn unbind(&mut self, attribute: &str, channel: VisualChannel) -> Result<VisualMapping> {
        let ix = self.mapping_index(attribute, channel)?;
        let carriers = self.glyphs_with_attribute(attribute)?;
        let mapping = self.mappings.remove(ix);
        for id in carriers {
            if let Some(i) = self.glyph_index(id) {
                self.glyphs[i].channel_values.remove(&channel);
            }
        }
        self.diagnostics
            .retain(|r| !(r.attribute == attribute && r.channel == channel));
        Ok(mapping)
    }

    /// Mapping that drives `channel` on glyph `id`, if any.
    pub fn mapping_for_glyph(&self, id: GlyphId, channel: VisualChannel) -> Option<&VisualMapping> {
        let glyph = self.glyph(id).ok()?;
        let row = self.table.row(glyph.row_id)?;
        self.mappings.iter().find(|m| {
            m.channel == channel
                && self
                    .table
                    .attribute_index(&m.attribute)
                    .is_some_and(|i| !row.values[i].is_missing())
        })
    }

    fn check_channel_free(
        &self,
        attribute: &str,
        channel: VisualChannel,
        carriers: &[GlyphId],
    ) -> Result<()> {
        for other in self
            .mappings
            .iter()
            .filter(|m| m.channel == channel && m.attribute != attribute)
        {
            let col = self
                .table
                .attribute_index(&other.attribute)
                .ok_or_else(|| EngineError::UnknownAttribute(other.attribute.clone()))?;
            let shared = carriers.iter().any(|id| {
                self.glyph(*id)
                    .ok()
                    .and_then(|g| self.table.value(g.row_id, col))
                    .is_some_and(|v| !v.is_missing())
            });
            if shared {
                return Err(EngineError::ChannelOccupied {
                    attribute: attribute.to_string(),
                    channel: channel.to_string(),
                    other: other.attribute.clone(),
                });
            }
        }
        Ok(())
    }

    /// Encodes all carriers first, then writes, so a failure leaves the scene
    /// untouched.
    fn apply_mapping(&mut self, mapping: &VisualMapping, carriers: &[GlyphId]) -> Result<()> {
        let col = self
            .table
            .attribute_index(&mapping.attribute)
            .ok_or_else(|| EngineError::UnknownAttribute(mapping.attribute.clone()))?;
        let attr = &self.table.attributes[col];
        let mut updates = Vec::with_capacity(carriers.len());
        for id in carriers {
            let i = self
                .glyph_index(*id)
                .ok_or_else(|| EngineError::UnknownGlyph(id.to_string()))?;
            let row = self
                .table
                .row(self.glyphs[i].row_id)
                .ok_or_else(|| EngineError::IntegrityViolation(format!("glyph {id} lost its row")))?;
            updates.push((i, encode::encode(&row.values[col], mapping, attr)?));
        }
        for (i, v) in updates {
            self.glyphs[i].channel_values.insert(mapping.channel, v);
        }
        Ok(())
    }

    /// Re-encodes every glyph bound by the mapping.
    pub fn propagate(&mut self, attribute: &str, channel: VisualChannel) -> Result<usize> {
        let ix = self.mapping_index(attribute, channel)?;
        let mapping = self.mappings[ix].clone();
        let carriers = self.glyphs_with_attribute(attribute)?;
        self.apply_mapping(&mapping, &carriers)?;
        Ok(carriers.len())
    }

    fn record_report(
        &mut self,
        attribute: &str,
        channel: VisualChannel,
        glyph: Option<GlyphId>,
    ) -> ValidationReport {
        let report = nudging::validate_all(channel, attribute, glyph, self);
        match self
            .diagnostics
            .iter_mut()
            .find(|r| r.attribute == attribute && r.channel == channel)
        {
            Some(slot) => *slot = report.clone(),
            None => self.diagnostics.push(report.clone()),
        }
        report
    }

    /// Validation of `channel` for `attribute` in the current context, without
    /// binding anything.
    pub fn validate_channel(&self, attribute: &str, channel: VisualChannel) -> Result<ValidationReport> {
        let carriers = self.glyphs_with_attribute(attribute)?;
        Ok(nudging::validate_all(channel, attribute, carriers.first().copied(), self))
    }

    /// Permitted channels for `attribute` in effectiveness order, each with
    /// every applicable verdict (orientation, symmetry, contrast,
    /// separability) evaluated against the current scene.
    pub fn ranked_channels(&self, attribute: &str) -> Result<Vec<RankedChannel>> {
        let attr = self.table.attribute(attribute)?;
        let carriers = self.glyphs_with_attribute(attribute)?;
        let probe = carriers.first().copied();
        Ok(ranking::rank_with(attr, &self.view, |channel| {
            nudging::validate_all(channel, attribute, probe, self).verdicts
        }))
    }

    pub fn recommend(&self, attribute: &str) -> Result<Recommendation> {
        let ranked = self.ranked_channels(attribute)?;
        Ok(ranking::pick(&ranked).expect("every type has a permitted channel"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DataAttribute, DataTable, DataValue, GlyphTemplate, RowFilter};

    /// Houses and money stacks both carry `cost`; only houses carry `rank`.
    fn trip() -> Scene {
        let table = DataTable::new(
            vec![
                DataAttribute::categorical("kind", AttributeType::Nominal, ["hotel", "expense"])
                    .unwrap(),
                DataAttribute::quantitative("cost", 0.0, 120.0).unwrap(),
                DataAttribute::categorical("rank", AttributeType::Ordinal, ["1", "2", "3"]).unwrap(),
            ],
            vec![
                vec!["hotel".into(), 80.0.into(), "3".into()],
                vec!["hotel".into(), 120.0.into(), "2".into()],
                vec!["expense".into(), 30.0.into(), DataValue::Missing],
                vec!["expense".into(), 60.0.into(), DataValue::Missing],
            ],
        )
        .unwrap();
        let mut s = Scene::new(table);
        let mut house = GlyphTemplate::cube();
        house.id = "house".into();
        house.symmetry_orders = [1, 1, 1];
        house.base_extents = [0.1, 0.2, 0.1];
        let mut stack = GlyphTemplate::cube();
        stack.id = "money_stack".into();
        s.add_template(house).unwrap();
        s.add_template(stack).unwrap();
        s.instantiate_glyphs(&RowFilter::parse("kind=hotel").unwrap(), "house")
            .unwrap();
        s.instantiate_glyphs(&RowFilter::parse("kind=expense").unwrap(), "money_stack")
            .unwrap();
        s
    }

    fn ly(s: &Scene, i: usize) -> Option<f64> {
        s.glyphs[i].channel_values.get(&VisualChannel::LengthY).copied()
    }

    #[test]
    fn bind_propagates_across_templates() {
        let mut s = trip();
        let (m, report) = s
            .bind("cost", VisualChannel::LengthY, BindOptions::default())
            .unwrap();
        // default scale: max cost 120 maps to the first carrier's base height 0.2
        assert_eq!(m.scale, 0.2 / 120.0);
        assert!(report.overall_valid);
        for (i, cost) in [80.0, 120.0, 30.0, 60.0].into_iter().enumerate() {
            assert_eq!(ly(&s, i), Some(m.scale * cost));
        }
        s.validate_integrity().unwrap();
    }

    #[test]
    fn separability_warning_does_not_block() {
        let mut s = trip();
        s.bind("cost", VisualChannel::LengthY, BindOptions::default())
            .unwrap();
        let before = s.mappings.len();
        let (_, report) = s
            .bind("rank", VisualChannel::LengthZ, BindOptions::default())
            .unwrap();
        assert!(!report.overall_valid);
        assert!(report.failures().any(|v| v.rule == crate::nudging::Rule::Separability));
        assert_eq!(s.mappings.len(), before + 1);
        assert!(s.glyphs[0].channel_values.contains_key(&VisualChannel::LengthZ));
        assert!(!s.glyphs[2].channel_values.contains_key(&VisualChannel::LengthZ));
    }

    #[test]
    fn bind_errors() {
        let mut s = trip();
        let err = s
            .bind("kind", VisualChannel::LengthX, BindOptions::default())
            .unwrap_err();
        assert_eq!(err.code(), "NominalChannelUnsupported");
        s.bind("cost", VisualChannel::LengthY, BindOptions::default())
            .unwrap();
        let err = s
            .bind("cost", VisualChannel::LengthY, BindOptions::default())
            .unwrap_err();
        assert_eq!(err.code(), "DuplicateMapping");
        let err = s
            .bind("nope", VisualChannel::LengthY, BindOptions::default())
            .unwrap_err();
        assert_eq!(err.code(), "UnknownAttribute");
        let err = s
            .bind("rank", VisualChannel::LengthY, BindOptions::default())
            .unwrap_err();
        assert_eq!(err.code(), "ChannelOccupied");
    }

    #[test]
    fn rescale_and_identity() {
        let mut s = trip();
        s.bind(
            "cost",
            VisualChannel::LengthY,
            BindOptions {
                scale: Some(5.0),
                ..Default::default()
            },
        )
        .unwrap();
        let before = s.snapshot();
        s.rescale("cost", VisualChannel::LengthY, 1.0).unwrap();
        assert_eq!(s.glyphs, before.glyphs);
        let (m, _) = s.rescale("cost", VisualChannel::LengthY, 2.0).unwrap();
        assert_eq!(m.scale, 10.0);
        assert_eq!(ly(&s, 2), Some(300.0));
        let err = s.rescale("cost", VisualChannel::LengthY, 0.0).unwrap_err();
        assert_eq!(err.code(), "NonPositiveFactor");
        let err = s.rescale("cost", VisualChannel::LengthX, 2.0).unwrap_err();
        assert_eq!(err.code(), "UnknownMapping");
    }

    #[test]
    fn unbind_restores_defaults() {
        let mut s = trip();
        s.bind("cost", VisualChannel::LengthY, BindOptions::default())
            .unwrap();
        s.bind("rank", VisualChannel::ColorLuminance, BindOptions::default())
            .unwrap();
        s.unbind("cost", VisualChannel::LengthY).unwrap();
        assert!(s.glyphs.iter().all(|g| !g.channel_values.contains_key(&VisualChannel::LengthY)));
        let t = s.template("house").unwrap().clone();
        assert_eq!(encode::extents(&s.glyphs[0].channel_values, &t)[1], t.base_extents[1]);
        assert!(s.glyphs[0].channel_values.contains_key(&VisualChannel::ColorLuminance));
        let err = s.unbind("cost", VisualChannel::LengthY).unwrap_err();
        assert_eq!(err.code(), "UnknownMapping");
        assert_eq!(s.diagnostics.len(), 1);
    }

    #[test]
    fn double_encoding_same_attribute() {
        let mut s = trip();
        s.bind("cost", VisualChannel::LengthY, BindOptions::default())
            .unwrap();
        let (_, report) = s
            .bind("cost", VisualChannel::ColorLuminance, BindOptions::default())
            .unwrap();
        assert!(report
            .verdict(crate::nudging::Rule::Separability)
            .is_some_and(|v| v.valid));
        assert_eq!(s.glyphs[1].channel_values[&VisualChannel::ColorLuminance], 1.0);
    }

    #[test]
    fn negative_domain_on_size_rejected() {
        let table = DataTable::new(
            vec![DataAttribute::quantitative("delta", -1.0, 1.0).unwrap()],
            vec![vec![DataValue::Number(0.5)]],
        )
        .unwrap();
        let mut s = Scene::new(table);
        s.add_template(GlyphTemplate::cube()).unwrap();
        s.instantiate_glyphs(&RowFilter::All, "cube").unwrap();
        let err = s
            .bind("delta", VisualChannel::LengthX, BindOptions::default())
            .unwrap_err();
        assert_eq!(err.code(), "NegativeSizeDomain");
        // angles accept negative data
        s.bind("delta", VisualChannel::AnglePsi, BindOptions::default())
            .unwrap();
    }
}
