//! The command vocabulary shared by scripts, the CLI and the HTTP service.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::autolayout::{Anchor, JoinMode};
use crate::error::{EngineError, Result};
use crate::geometry::Vec3;
use crate::mapping::VisualChannel;
use crate::model::GlyphId;
use crate::nudging::Rule;

pub fn parse_vec3(s: &str) -> std::result::Result<Vec3, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got '{s}'"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("bad number '{p}' in '{s}'"))?;
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

fn parse_channel(s: &str) -> std::result::Result<VisualChannel, String> {
    s.parse().map_err(|e: EngineError| e.to_string())
}

fn parse_glyph(s: &str) -> std::result::Result<GlyphId, String> {
    s.parse().map_err(|e: EngineError| e.to_string())
}

fn parse_rule(s: &str) -> std::result::Result<Rule, String> {
    s.parse().map_err(|e: EngineError| e.to_string())
}

/// `attr` or `recommended`, which binds the top-ranked valid channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelChoice {
    Fixed(VisualChannel),
    Recommended,
}

fn parse_choice(s: &str) -> std::result::Result<ChannelChoice, String> {
    if s == "recommended" || s == "auto" {
        Ok(ChannelChoice::Recommended)
    } else {
        parse_channel(s).map(ChannelChoice::Fixed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Rank,
    Equality,
}

impl From<ModeArg> for JoinMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Rank => JoinMode::Rank,
            ModeArg::Equality => JoinMode::Equality,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnchorArg {
    Center,
    Top,
    Front,
}

impl From<AnchorArg> for Anchor {
    fn from(a: AnchorArg) -> Self {
        match a {
            AnchorArg::Center => Anchor::Center,
            AnchorArg::Top => Anchor::Top,
            AnchorArg::Front => Anchor::Front,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct NoiseArgs {
    #[arg(long, default_value_t = 0.0)]
    pub extent_sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub position_sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub drop: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Load a CSV table, replacing the scene.
    LoadData {
        path: PathBuf,
        /// Column type override, `name=ord:low|mid|high`.
        #[arg(long = "type", value_name = "NAME=SPEC")]
        types: Vec<String>,
    },
    /// Load a reality file and run detection on its frame.
    LoadReality {
        path: PathBuf,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Fetch a glyph template from the gallery, or the local cache.
    FetchGlyph { name: String },
    /// Create one glyph per matching data row.
    Instantiate {
        #[arg(long)]
        template: String,
        /// Row filter: `attr`, `attr=value`, `attr!=value` or `*`.
        #[arg(long = "where", default_value = "*")]
        filter: String,
        /// Also group the new glyphs into this collection.
        #[arg(long)]
        collection: Option<String>,
    },
    /// Group glyphs into a collection.
    Group {
        #[arg(long)]
        name: Option<String>,
        #[arg(long, value_delimiter = ',', value_parser = parse_glyph)]
        glyphs: Vec<GlyphId>,
        #[arg(long, conflicts_with = "glyphs")]
        template: Option<String>,
        #[arg(long)]
        key: Option<String>,
    },
    /// Map an attribute to a visual channel and encode every glyph.
    Bind {
        #[arg(long)]
        attr: String,
        #[arg(long, value_parser = parse_choice)]
        channel: ChannelChoice,
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long)]
        baseline: Option<f64>,
        #[arg(long)]
        palette_seed: Option<i64>,
    },
    /// Remove a mapping.
    Unbind {
        #[arg(long)]
        attr: String,
        #[arg(long, value_parser = parse_channel)]
        channel: VisualChannel,
    },
    /// Multiply the scale of a mapping.
    Rescale {
        #[arg(long)]
        attr: String,
        #[arg(long, value_parser = parse_channel)]
        channel: VisualChannel,
        #[arg(long)]
        factor: f64,
    },
    /// Rank the permitted channels for an attribute.
    Nudge {
        #[arg(long)]
        attr: String,
    },
    /// Evaluate a single rule.
    Check {
        #[arg(long, value_parser = parse_rule)]
        rule: Rule,
        #[arg(long, value_parser = parse_channel)]
        channel: VisualChannel,
        #[arg(long)]
        attr: Option<String>,
        #[arg(long, value_parser = parse_glyph)]
        glyph: Option<GlyphId>,
    },
    /// Set the viewing pose used by the orientation rule.
    View {
        #[arg(long, value_parser = parse_vec3)]
        position: Vec3,
        #[arg(long, value_parser = parse_vec3)]
        forward: Vec3,
        #[arg(long, value_parser = parse_vec3, default_value = "0,1,0")]
        up: Vec3,
    },
    /// Scale a mapping so one glyph matches a measured real object.
    Sync {
        #[arg(long)]
        object: String,
        #[arg(long)]
        source: String,
        #[arg(long, value_parser = parse_glyph)]
        glyph: GlyphId,
        #[arg(long, value_parser = parse_channel)]
        channel: VisualChannel,
    },
    /// Pair glyphs with detected objects and place them.
    Autolayout {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        object_channel: String,
        #[arg(long)]
        attr: String,
        #[arg(long, value_enum, default_value = "top")]
        anchor: AnchorArg,
        #[arg(long, default_value_t = 0.0)]
        clearance: f64,
        #[arg(long)]
        collection: Option<String>,
    },
    /// Place glyphs onto objects from an explicit pairing file
    /// (`{"pairs": [{"object": ..., "glyph": ...}]}`).
    Place {
        pairs: PathBuf,
        #[arg(long, value_enum, default_value = "top")]
        anchor: AnchorArg,
        #[arg(long, default_value_t = 0.0)]
        clearance: f64,
    },
    /// Translate glyphs.
    Move {
        #[arg(long, value_parser = parse_glyph)]
        glyph: GlyphId,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        du: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        dv: f64,
    },
    /// Grip a glyph or collection and drop it in front of the view pose.
    Pick {
        #[arg(long, value_parser = parse_glyph, conflicts_with = "collection")]
        glyph: Option<GlyphId>,
        #[arg(long)]
        collection: Option<String>,
        #[arg(long)]
        distance: f64,
    },
    /// Spread a collection along a path drawn on the screen.
    Sketch {
        #[arg(long)]
        collection: String,
        #[arg(long)]
        path: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        plane_y: Option<f64>,
    },
    /// Spread a collection along a recorded device trace.
    Brush {
        #[arg(long)]
        collection: String,
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        reach: f64,
    },
    /// Give one collection the relative layout of another.
    CopyLayout {
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        offset: Option<Vec3>,
    },
    /// Stack overlapping glyphs of a collection.
    Stack {
        #[arg(long)]
        collection: String,
    },
    /// Write the renderer export document.
    Export { path: PathBuf },
    /// Save the scene.
    Save { path: PathBuf },
    /// Load a saved scene.
    Load { path: PathBuf },
    /// Revert the last scene change.
    Undo,
    /// Reapply the last undone change.
    Redo,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::LoadData { .. } => "load-data",
            Command::LoadReality { .. } => "load-reality",
            Command::FetchGlyph { .. } => "fetch-glyph",
            Command::Instantiate { .. } => "instantiate",
            Command::Group { .. } => "group",
            Command::Bind { .. } => "bind",
            Command::Unbind { .. } => "unbind",
            Command::Rescale { .. } => "rescale",
            Command::Nudge { .. } => "nudge",
            Command::Check { .. } => "check",
            Command::View { .. } => "view",
            Command::Sync { .. } => "sync",
            Command::Autolayout { .. } => "autolayout",
            Command::Place { .. } => "place",
            Command::Move { .. } => "move",
            Command::Pick { .. } => "pick",
            Command::Sketch { .. } => "sketch",
            Command::Brush { .. } => "brush",
            Command::CopyLayout { .. } => "copy-layout",
            Command::Stack { .. } => "stack",
            Command::Export { .. } => "export",
            Command::Save { .. } => "save",
            Command::Load { .. } => "load",
            Command::Undo => "undo",
            Command::Redo => "redo",
        }
    }

    /// Whether the command can change the scene (and so gets an undo entry).
    pub fn mutates(&self) -> bool {
        !matches!(
            self,
            Command::Nudge { .. }
                | Command::Check { .. }
                | Command::Export { .. }
                | Command::Save { .. }
                | Command::Undo
                | Command::Redo
        )
    }
}

#[derive(Debug, Parser)]
#[command(no_binary_name = true, disable_help_subcommand = true)]
struct Line {
    #[command(subcommand)]
    command: Command,
}

/// Parses one command line, e.g. `bind --attr cost --channel length_y`.
/// Blank lines and `#` comments give `None`.
pub fn parse_line(line: &str) -> Result<Option<Command>> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let words = shlex::split(trimmed)
        .ok_or_else(|| EngineError::Parse(format!("unbalanced quotes in '{trimmed}'")))?;
    let words: Vec<String> = words.into_iter().take_while(|w| !w.starts_with('#')).collect();
    Line::try_parse_from(words)
        .map(|l| Some(l.command))
        .map_err(|e| EngineError::Parse(e.render().to_string().trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bind() {
        let c = parse_line("bind --attr cost --channel y-height").unwrap().unwrap();
        assert_eq!(
            c,
            Command::Bind {
                attr: "cost".into(),
                channel: ChannelChoice::Fixed(VisualChannel::LengthY),
                scale: None,
                baseline: None,
                palette_seed: None,
            }
        );
        let c = parse_line("bind --attr d --channel recommended").unwrap().unwrap();
        assert!(matches!(c, Command::Bind { channel: ChannelChoice::Recommended, .. }));
    }

    #[test]
    fn comments_and_quotes() {
        assert_eq!(parse_line("   # nothing").unwrap(), None);
        assert_eq!(parse_line("").unwrap(), None);
        let c = parse_line("instantiate --template shoe --where \"city=New York\" # trailing").unwrap();
        assert!(matches!(c, Some(Command::Instantiate { filter, .. }) if filter == "city=New York"));
    }

    #[test]
    fn negative_numbers() {
        let c = parse_line("move --glyph g3 --du -0.5 --dv 1").unwrap().unwrap();
        assert_eq!(c, Command::Move { glyph: GlyphId(3), du: -0.5, dv: 1.0 });
        let c = parse_line("copy-layout --source a --target b --offset -1,0,0").unwrap().unwrap();
        assert!(matches!(c, Command::CopyLayout { offset: Some(o), .. } if o.x == -1.0));
    }

    #[test]
    fn errors_are_parse() {
        assert_eq!(parse_line("frobnicate").unwrap_err().code(), "Parse");
        assert_eq!(parse_line("bind --attr a --channel sparkle").unwrap_err().code(), "Parse");
        assert_eq!(parse_line("bind \"open").unwrap_err().code(), "Parse");
    }
}
