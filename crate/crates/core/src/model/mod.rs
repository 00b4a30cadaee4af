//! Data, glyph templates, glyph instances, collections and the scene
//! aggregate.

mod data;
mod scene;
mod template;

pub use data::{AttributeType, DataAttribute, DataRow, DataTable, DataValue, Domain, RowFilter};
pub use scene::{
    grid_position, Collection, GlyphId, Scene, ViewPose, VirtualGlyph, GRID_COLUMNS, GRID_SPACING,
};
pub use template::{GlyphTemplate, Hsl, CONTINUOUS_SYMMETRY};
