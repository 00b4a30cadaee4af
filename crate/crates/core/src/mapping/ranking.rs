use serde::{Deserialize, Serialize};

use super::channel::VisualChannel;
use super::VisualMapping;
use crate::model::{AttributeType, DataAttribute, ViewPose};
use crate::nudging::{self, Verdict};

use VisualChannel::*;

const QUANTITATIVE: [VisualChannel; 12] = [
    LengthX,
    LengthY,
    LengthZ,
    AnglePhi,
    AngleTheta,
    AnglePsi,
    AreaTop,
    AreaLeft,
    AreaFront,
    ColorLuminance,
    ColorSaturation,
    Volume,
];

const ORDINAL: [VisualChannel; 12] = [
    ColorLuminance,
    ColorSaturation,
    LengthX,
    LengthY,
    LengthZ,
    AnglePhi,
    AngleTheta,
    AnglePsi,
    AreaTop,
    AreaLeft,
    AreaFront,
    Volume,
];

const NOMINAL: [VisualChannel; 1] = [ColorHue];

/// Permitted channels per data type, most effective first.
pub fn effectiveness_order(kind: AttributeType) -> &'static [VisualChannel] {
    match kind {
        AttributeType::Quantitative => &QUANTITATIVE,
        AttributeType::Ordinal => &ORDINAL,
        AttributeType::Nominal => &NOMINAL,
    }
}

/// Coarse family rank used when comparing against the effectiveness order:
/// length, angle, area, color, volume.
pub fn ranking_group(channel: VisualChannel) -> u8 {
    match channel {
        LengthX | LengthY | LengthZ => 0,
        AnglePhi | AngleTheta | AnglePsi => 1,
        AreaTop | AreaLeft | AreaFront => 2,
        ColorLuminance | ColorSaturation | ColorHue | Opacity => 3,
        Volume => 4,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedChannel {
    pub channel: VisualChannel,
    pub valid: bool,
    pub reasons: Vec<Verdict>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub channel: VisualChannel,
    /// False when no permitted channel passed validation and the top-ranked
    /// one is offered anyway.
    pub valid: bool,
}

/// Orders the permitted channels of `attr` and runs the view- and
/// mapping-dependent rules on each. Lengths are re-ordered by ascending depth
/// component (stable, so x before y before z on ties).
pub fn ranked_channels(
    attr: &DataAttribute,
    view: &ViewPose,
    existing: &[VisualMapping],
) -> Vec<RankedChannel> {
    rank_with(attr, view, |channel| {
        let mut reasons = Vec::new();
        if let Ok(v) = nudging::validate_orientation(channel, view) {
            reasons.push(v);
        }
        if nudging::separability_applies(channel) {
            reasons.push(nudging::validate_separability(channel, &attr.name, existing));
        }
        reasons
    })
}

pub(crate) fn rank_with(
    attr: &DataAttribute,
    view: &ViewPose,
    mut verdicts: impl FnMut(VisualChannel) -> Vec<Verdict>,
) -> Vec<RankedChannel> {
    let mut order: Vec<VisualChannel> = effectiveness_order(attr.kind).to_vec();
    if let Some(start) = order.iter().position(|c| c.is_length()) {
        let end = start + order[start..].iter().take_while(|c| c.is_length()).count();
        order[start..end].sort_by(|a, b| depth(*a, view).total_cmp(&depth(*b, view)));
    }
    order
        .into_iter()
        .map(|channel| {
            let reasons = verdicts(channel);
            RankedChannel {
                channel,
                valid: reasons.iter().all(|v| v.valid),
                reasons,
            }
        })
        .collect()
}

fn depth(channel: VisualChannel, view: &ViewPose) -> f64 {
    channel
        .spanned_axes()
        .into_iter()
        .map(|a| a.unit().dot(&view.forward).abs())
        .fold(0.0, f64::max)
}

/// First valid entry, or the top-ranked one flagged invalid.
pub fn pick(ranked: &[RankedChannel]) -> Option<Recommendation> {
    ranked
        .iter()
        .find(|r| r.valid)
        .map(|r| Recommendation {
            channel: r.channel,
            valid: true,
        })
        .or_else(|| {
            ranked.first().map(|r| Recommendation {
                channel: r.channel,
                valid: false,
            })
        })
}

pub fn recommend(attr: &DataAttribute, view: &ViewPose, existing: &[VisualMapping]) -> Recommendation {
    pick(&ranked_channels(attr, view, existing)).expect("every type has a permitted channel")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vec3;

    fn quant() -> DataAttribute {
        DataAttribute::quantitative("distance", 0.0, 100.0).unwrap()
    }

    #[test]
    fn front_view_quantitative_starts_with_x() {
        let r = ranked_channels(&quant(), &ViewPose::front_facing(), &[]);
        assert_eq!(r[0].channel, LengthX);
        assert_eq!(r[1].channel, LengthY);
        assert!(r[0].valid && r[1].valid);
        assert!(!r[2].valid, "length_z is depth-aligned");
    }

    #[test]
    fn side_view_reorders_lengths_by_depth() {
        let view =
            ViewPose::looking(vec3(1.0, 0.0, 0.0), vec3(-1.0, 0.0, 0.0), vec3(0.0, 1.0, 0.0)).unwrap();
        let r = ranked_channels(&quant(), &view, &[]);
        let lengths: Vec<_> = r.iter().take(3).map(|x| x.channel).collect();
        assert_eq!(lengths, vec![LengthY, LengthZ, LengthX]);
        assert_eq!(recommend(&quant(), &view, &[]).channel, LengthY);
    }

    #[test]
    fn nominal_and_ordinal_heads() {
        let nom = DataAttribute::categorical("city", AttributeType::Nominal, ["a", "b"]).unwrap();
        let r = ranked_channels(&nom, &ViewPose::front_facing(), &[]);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].channel, ColorHue);
        let ord = DataAttribute::categorical("rank", AttributeType::Ordinal, ["1", "2"]).unwrap();
        assert_eq!(recommend(&ord, &ViewPose::front_facing(), &[]).channel, ColorLuminance);
    }

    #[test]
    fn bound_length_pushes_to_angles() {
        // hand-applied: lengths fail integration, z also fails orientation;
        // angle_phi is the first remaining channel.
        let existing = vec![VisualMapping::new("other", LengthX, 1.0)];
        let rec = recommend(&quant(), &ViewPose::front_facing(), &existing);
        assert_eq!(rec, Recommendation { channel: AnglePhi, valid: true });
    }

    #[test]
    fn all_invalid_falls_back_to_top() {
        let ranked = vec![RankedChannel {
            channel: Volume,
            valid: false,
            reasons: vec![],
        }];
        assert_eq!(pick(&ranked), Some(Recommendation { channel: Volume, valid: false }));
    }
}
