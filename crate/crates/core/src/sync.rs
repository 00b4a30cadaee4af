//! Visual scale synchronization between a detected real object and a glyph.

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::mapping::{ChannelFamily, VisualChannel};
use crate::model::{GlyphId, Scene};
use crate::reality::{extract_channels, source_dimension};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncRequest {
    pub real_object_id: String,
    pub source_channel: String,
    pub target_glyph_id: GlyphId,
    pub target_channel: VisualChannel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyncMode {
    Unbound,
    Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncOutcome {
    pub mode: SyncMode,
    /// Value measured on the real object.
    pub value: f64,
    pub affected: Vec<GlyphId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub new_scale: Option<f64>,
}

fn incompatible(req: &SyncRequest) -> EngineError {
    EngineError::IncompatibleChannels(req.source_channel.clone(), req.target_channel.to_string())
}

impl Scene {
    /// Measured value of `req.source_channel` after checking it can drive
    /// `req.target_channel`.
    fn sync_source_value(&self, req: &SyncRequest) -> Result<f64> {
        let target_kind = match req.target_channel.family() {
            ChannelFamily::Size => req.target_channel.size_kind().expect("size channel"),
            _ => return Err(incompatible(req)),
        };
        let object = self.real_object(&req.real_object_id)?;
        let channels = extract_channels(object)?;
        let dim = source_dimension(&req.source_channel).ok_or_else(|| incompatible(req))?;
        if dim != target_kind.dimension() {
            return Err(incompatible(req));
        }
        let r = channels
            .number(&req.source_channel)
            .ok_or_else(|| incompatible(req))?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(EngineError::InvalidArgument(format!(
                "measured {} of {} must be positive, got {r}",
                req.source_channel, req.real_object_id
            )));
        }
        Ok(r)
    }

    /// Applies the measured value to the target glyph. Without a mapping on
    /// the target channel, every glyph of the same template that has no such
    /// mapping gets the raw value. With a mapping, its scale becomes
    /// `r / x_anchor` and all glyphs bound by it are re-encoded.
    pub fn sync(&mut self, req: &SyncRequest) -> Result<SyncOutcome> {
        let r = self.sync_source_value(req)?;
        let glyph = self.glyph(req.target_glyph_id)?.clone();
        let channel = req.target_channel;

        let Some(mapping) = self.mapping_for_glyph(glyph.id, channel).cloned() else {
            let targets: Vec<GlyphId> = self
                .glyphs_with_template(&glyph.template_id)
                .into_iter()
                .filter(|g| self.mapping_for_glyph(*g, channel).is_none())
                .collect();
            for id in &targets {
                self.glyph_mut(*id)?.channel_values.insert(channel, r);
            }
            return Ok(SyncOutcome {
                mode: SyncMode::Unbound,
                value: r,
                affected: targets,
                attribute: None,
                new_scale: None,
            });
        };

        let attr = self.table.attribute(&mapping.attribute)?;
        let col = self
            .table
            .attribute_index(&mapping.attribute)
            .expect("attribute resolved above");
        let x = self
            .table
            .value(glyph.row_id, col)
            .and_then(|v| attr.numeric(v))
            .ok_or_else(|| {
                EngineError::IntegrityViolation(format!("glyph {} has no value", glyph.id))
            })?;
        if x == 0.0 {
            return Err(EngineError::ZeroAnchorValue {
                glyph: glyph.id.to_string(),
                attribute: mapping.attribute.clone(),
            });
        }
        let scale = r / x;
        self.set_scale(&mapping.attribute, channel, scale)?;
        let affected = self.glyphs_with_attribute(&mapping.attribute)?;
        Ok(SyncOutcome {
            mode: SyncMode::Bound,
            value: r,
            affected,
            attribute: Some(mapping.attribute),
            new_scale: Some(scale),
        })
    }
}
