use thiserror::Error;

/// Every failure the engine can report. [`EngineError::code`] gives the stable
/// identifier surfaced by the CLI (`ERROR <code>: ...`), the HTTP service and
/// the C ABI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("unknown template '{0}'")]
    UnknownTemplate(String),
    #[error("row filter selected no rows")]
    EmptySelection,
    #[error("glyph {0} already belongs to collection {1}")]
    GlyphAlreadyCollected(String, String),
    #[error("unknown glyph {0}")]
    UnknownGlyph(String),
    #[error("unknown collection {0}")]
    UnknownCollection(String),
    #[error("unknown attribute '{0}'")]
    UnknownAttribute(String),
    #[error("size channel {channel} cannot encode negative data ({value}) of '{attribute}'")]
    NegativeSizeDomain {
        attribute: String,
        channel: String,
        value: f64,
    },
    #[error("value {value} outside the domain of '{attribute}'")]
    DomainViolation { attribute: String, value: String },
    #[error("mapping {0} -> {1} already exists")]
    DuplicateMapping(String, String),
    #[error("nominal attribute '{0}' can only be encoded with color_hue, not {1}")]
    NominalChannelUnsupported(String, String),
    #[error("channel {channel} is already bound to '{other}' on glyphs that also carry '{attribute}'")]
    ChannelOccupied {
        attribute: String,
        channel: String,
        other: String,
    },
    #[error("scale factor must be positive, got {0}")]
    NonPositiveFactor(f64),
    #[error("no mapping {0} -> {1}")]
    UnknownMapping(String, String),
    #[error("rule {rule} does not apply to channel {channel}")]
    InapplicableRule { rule: String, channel: String },
    #[error("glyph footprint is outside the camera frame: {0}")]
    FootprintOutOfFrame(String),
    #[error("camera frame has no luminance samples")]
    EmptyFrame,
    #[error("no camera frame loaded")]
    NoFrame,
    #[error("real object {0} has not been detected")]
    NotDetected(String),
    #[error("unknown real object {0}")]
    UnknownObject(String),
    #[error("channel {0} cannot be synchronized to {1}")]
    IncompatibleChannels(String, String),
    #[error("anchor glyph {glyph} has data value 0 for '{attribute}'; scale is undefined")]
    ZeroAnchorValue { glyph: String, attribute: String },
    #[error("cardinality mismatch: {left} vs {right}")]
    CardinalityMismatch { left: usize, right: usize },
    #[error("duplicate join key '{0}'")]
    DuplicateKey(String),
    #[error("unknown reference {0}")]
    UnknownReference(String),
    #[error("unknown layout target {0}")]
    UnknownTarget(String),
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("path is degenerate: {0}")]
    DegeneratePath(String),
    #[error("collection {0} is empty")]
    EmptyCollection(String),
    #[error("pose trace is degenerate: {0}")]
    DegenerateTrace(String),
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRows {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("unknown type tag '{0}' (expected quant, ord or nom)")]
    UnknownTypeTag(String),
    #[error("file is empty: {0}")]
    EmptyFile(String),
    #[error("ordinal attribute '{0}' needs an explicit category order")]
    MissingCategoryOrder(String),
    #[error("unsupported format_version {found} (supported: {supported})")]
    VersionMismatch { found: u64, supported: u64 },
    #[error("integrity violation: {0}")]
    IntegrityViolation(String),
    #[error("glyph template '{0}' not found")]
    NotFound(String),
    #[error("gallery unavailable and '{0}' is not cached")]
    NetworkUnavailable(String),
    #[error("malformed template: {0}")]
    MalformedTemplate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl EngineError {
    /// Stable machine-readable code; equal to the variant name.
    pub fn code(&self) -> &'static str {
        use EngineError::*;
        match self {
            UnknownTemplate(_) => "UnknownTemplate",
            EmptySelection => "EmptySelection",
            GlyphAlreadyCollected(..) => "GlyphAlreadyCollected",
            UnknownGlyph(_) => "UnknownGlyph",
            UnknownCollection(_) => "UnknownCollection",
            UnknownAttribute(_) => "UnknownAttribute",
            NegativeSizeDomain { .. } => "NegativeSizeDomain",
            DomainViolation { .. } => "DomainViolation",
            DuplicateMapping(..) => "DuplicateMapping",
            NominalChannelUnsupported(..) => "NominalChannelUnsupported",
            ChannelOccupied { .. } => "ChannelOccupied",
            NonPositiveFactor(_) => "NonPositiveFactor",
            UnknownMapping(..) => "UnknownMapping",
            InapplicableRule { .. } => "InapplicableRule",
            FootprintOutOfFrame(_) => "FootprintOutOfFrame",
            EmptyFrame => "EmptyFrame",
            NoFrame => "NoFrame",
            NotDetected(_) => "NotDetected",
            UnknownObject(_) => "UnknownObject",
            IncompatibleChannels(..) => "IncompatibleChannels",
            ZeroAnchorValue { .. } => "ZeroAnchorValue",
            CardinalityMismatch { .. } => "CardinalityMismatch",
            DuplicateKey(_) => "DuplicateKey",
            UnknownReference(_) => "UnknownReference",
            UnknownTarget(_) => "UnknownTarget",
            NonPositiveDistance(_) => "NonPositiveDistance",
            DegeneratePath(_) => "DegeneratePath",
            EmptyCollection(_) => "EmptyCollection",
            DegenerateTrace(_) => "DegenerateTrace",
            RaggedRows { .. } => "RaggedRows",
            UnknownTypeTag(_) => "UnknownTypeTag",
            EmptyFile(_) => "EmptyFile",
            MissingCategoryOrder(_) => "MissingCategoryOrder",
            VersionMismatch { .. } => "VersionMismatch",
            IntegrityViolation(_) => "IntegrityViolation",
            NotFound(_) => "NotFound",
            NetworkUnavailable(_) => "NetworkUnavailable",
            MalformedTemplate(_) => "MalformedTemplate",
            InvalidArgument(_) => "InvalidArgument",
            Parse(_) => "Parse",
            Io(_) => "Io",
        }
    }

    /// All codes, in declaration order. Used by the FFI layer to assign
    /// numeric error codes and by tests that check CLI reachability.
    pub const CODES: &'static [&'static str] = &[
        "UnknownTemplate",
        "EmptySelection",
        "GlyphAlreadyCollected",
        "UnknownGlyph",
        "UnknownCollection",
        "UnknownAttribute",
        "NegativeSizeDomain",
        "DomainViolation",
        "DuplicateMapping",
        "NominalChannelUnsupported",
        "ChannelOccupied",
        "NonPositiveFactor",
        "UnknownMapping",
        "InapplicableRule",
        "FootprintOutOfFrame",
        "EmptyFrame",
        "NoFrame",
        "NotDetected",
        "UnknownObject",
        "IncompatibleChannels",
        "ZeroAnchorValue",
        "CardinalityMismatch",
        "DuplicateKey",
        "UnknownReference",
        "UnknownTarget",
        "NonPositiveDistance",
        "DegeneratePath",
        "EmptyCollection",
        "DegenerateTrace",
        "RaggedRows",
        "UnknownTypeTag",
        "EmptyFile",
        "MissingCategoryOrder",
        "VersionMismatch",
        "IntegrityViolation",
        "NotFound",
        "NetworkUnavailable",
        "MalformedTemplate",
        "InvalidArgument",
        "Parse",
        "Io",
    ];
}

impl From<std::io::Error> for EngineError {
    fn from(e: std::io::Error) -> Self {
        EngineError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for EngineError {
    fn from(e: serde_json::Error) -> Self {
        EngineError::Parse(e.to_string())
    }
}

pub type Result<T, E = EngineError> = std::result::Result<T, E>;
