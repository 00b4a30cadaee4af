use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn unit(self) -> crate::geometry::Vec3 {
        let mut v = crate::geometry::Vec3::zeros();
        v[self.index()] = 1.0;
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelFamily {
    Size,
    Angle,
    Optical,
}

/// Geometric reading of a size channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeKind {
    Length(Axis),
    Area(Axis, Axis),
    Volume,
}

impl SizeKind {
    pub fn dimension(self) -> u8 {
        match self {
            SizeKind::Length(_) => 1,
            SizeKind::Area(..) => 2,
            SizeKind::Volume => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisualChannel {
    LengthX,
    LengthY,
    LengthZ,
    /// Spans x and z.
    AreaTop,
    /// Spans y and z.
    AreaLeft,
    /// Spans x and y.
    AreaFront,
    Volume,
    /// Rotation about y.
    AnglePhi,
    /// Rotation about x.
    AngleTheta,
    /// Rotation about z.
    AnglePsi,
    ColorHue,
    ColorLuminance,
    ColorSaturation,
    Opacity,
}

impl VisualChannel {
    pub const ALL: [VisualChannel; 14] = [
        VisualChannel::LengthX,
        VisualChannel::LengthY,
        VisualChannel::LengthZ,
        VisualChannel::AreaTop,
        VisualChannel::AreaLeft,
        VisualChannel::AreaFront,
        VisualChannel::Volume,
        VisualChannel::AnglePhi,
        VisualChannel::AngleTheta,
        VisualChannel::AnglePsi,
        VisualChannel::ColorHue,
        VisualChannel::ColorLuminance,
        VisualChannel::ColorSaturation,
        VisualChannel::Opacity,
    ];

    pub fn name(self) -> &'static str {
        use VisualChannel::*;
        match self {
            LengthX => "length_x",
            LengthY => "length_y",
            LengthZ => "length_z",
            AreaTop => "area_top",
            AreaLeft => "area_left",
            AreaFront => "area_front",
            Volume => "volume",
            AnglePhi => "angle_phi",
            AngleTheta => "angle_theta",
            AnglePsi => "angle_psi",
            ColorHue => "color_hue",
            ColorLuminance => "color_luminance",
            ColorSaturation => "color_saturation",
            Opacity => "opacity",
        }
    }

    pub fn family(self) -> ChannelFamily {
        use VisualChannel::*;
        match self {
            LengthX | LengthY | LengthZ | AreaTop | AreaLeft | AreaFront | Volume => {
                ChannelFamily::Size
            }
            AnglePhi | AngleTheta | AnglePsi => ChannelFamily::Angle,
            ColorHue | ColorLuminance | ColorSaturation | Opacity => ChannelFamily::Optical,
        }
    }

    pub fn size_kind(self) -> Option<SizeKind> {
        use VisualChannel::*;
        Some(match self {
            LengthX => SizeKind::Length(Axis::X),
            LengthY => SizeKind::Length(Axis::Y),
            LengthZ => SizeKind::Length(Axis::Z),
            AreaTop => SizeKind::Area(Axis::X, Axis::Z),
            AreaLeft => SizeKind::Area(Axis::Y, Axis::Z),
            AreaFront => SizeKind::Area(Axis::X, Axis::Y),
            Volume => SizeKind::Volume,
            _ => return None,
        })
    }

    /// Axes a size channel spans; empty for non-size channels.
    pub fn spanned_axes(self) -> Vec<Axis> {
        match self.size_kind() {
            Some(SizeKind::Length(a)) => vec![a],
            Some(SizeKind::Area(a, b)) => vec![a, b],
            Some(SizeKind::Volume) => Axis::ALL.to_vec(),
            None => Vec::new(),
        }
    }

    /// Rotation axis of an angle channel.
    pub fn angle_axis(self) -> Option<Axis> {
        match self {
            VisualChannel::AnglePhi => Some(Axis::Y),
            VisualChannel::AngleTheta => Some(Axis::X),
            VisualChannel::AnglePsi => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn is_length(self) -> bool {
        matches!(self.size_kind(), Some(SizeKind::Length(_)))
    }

    pub fn is_area(self) -> bool {
        matches!(self.size_kind(), Some(SizeKind::Area(..)))
    }

    /// Luminance, saturation and opacity: affine-normalized into `[0, 1]`.
    pub fn is_normalized(self) -> bool {
        matches!(
            self,
            VisualChannel::ColorLuminance | VisualChannel::ColorSaturation | VisualChannel::Opacity
        )
    }
}

impl fmt::Display for VisualChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VisualChannel {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let alias = match s {
            "x-width" | "width" => "length_x",
            "y-height" | "height" => "length_y",
            "z-length" | "depth" => "length_z",
            "hue" => "color_hue",
            "luminance" => "color_luminance",
            "saturation" => "color_saturation",
            other => other,
        };
        VisualChannel::ALL
            .into_iter()
            .find(|c| c.name() == alias)
            .ok_or_else(|| EngineError::Parse(format!("unknown visual channel '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in VisualChannel::ALL {
            assert_eq!(c.name().parse::<VisualChannel>().unwrap(), c);
            assert_eq!(
                serde_json::to_string(&c).unwrap(),
                format!("\"{}\"", c.name())
            );
        }
        assert_eq!("x-width".parse::<VisualChannel>().unwrap(), VisualChannel::LengthX);
    }

    #[test]
    fn families() {
        let sizes: Vec<_> = VisualChannel::ALL
            .into_iter()
            .filter(|c| c.family() == ChannelFamily::Size)
            .collect();
        assert_eq!(sizes.len(), 7);
        assert_eq!(VisualChannel::AreaTop.spanned_axes(), vec![Axis::X, Axis::Z]);
        assert_eq!(VisualChannel::AnglePhi.angle_axis(), Some(Axis::Y));
    }
}
