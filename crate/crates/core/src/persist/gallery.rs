use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::Value;

use super::{to_canonical_json, write_atomic};
use crate::error::{EngineError, Result};
use crate::model::GlyphTemplate;

pub const GALLERY_URL_ENV: &str = "MARVIST_GALLERY_URL";
pub const CACHE_DIR_ENV: &str = "MARVIST_CACHE_DIR";

/// Fetches glyph templates from a remote gallery, caching each one as
/// `<cache_dir>/<name>.json`. The cache is consulted first.
#[derive(Debug, Clone)]
pub struct GalleryClient {
    pub url: Option<String>,
    pub cache_dir: PathBuf,
    pub timeout: Duration,
}

pub fn default_cache_dir() -> PathBuf {
    dirs::cache_dir()
        .unwrap_or_else(std::env::temp_dir)
        .join("marvist")
}

impl GalleryClient {
    pub fn new(url: Option<String>, cache_dir: impl Into<PathBuf>) -> Self {
        Self {
            url: url.map(|u| u.trim_end_matches('/').to_string()),
            cache_dir: cache_dir.into(),
            timeout: Duration::from_secs(10),
        }
    }

    pub fn from_env() -> Self {
        let url = std::env::var(GALLERY_URL_ENV).ok().filter(|u| !u.is_empty());
        let cache = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(default_cache_dir);
        Self::new(url, cache)
    }

    fn cache_path(&self, name: &str) -> PathBuf {
        self.cache_dir.join(format!("{name}.json"))
    }

    pub fn fetch_template(&self, name: &str) -> Result<GlyphTemplate> {
        if name.is_empty()
            || !name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(EngineError::InvalidArgument(format!("bad template name '{name}'")));
        }
        let cached = self.cache_path(name);
        if cached.is_file() {
            return parse_template(&std::fs::read_to_string(&cached)?, name);
        }
        let Some(url) = &self.url else {
            return Err(EngineError::NetworkUnavailable(name.to_string()));
        };
        let body = self.get(&format!("{url}/glyphs/{name}"), name)?;
        let template = parse_template(&body, name)?;
        self.store(&cached, &template)?;
        Ok(template)
    }

    fn get(&self, url: &str, name: &str) -> Result<String> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        match agent.get(url).call() {
            Ok(mut resp) => resp
                .body_mut()
                .read_to_string()
                .map_err(|e| EngineError::NetworkUnavailable(format!("{name}: {e}"))),
            Err(ureq::Error::StatusCode(404)) => Err(EngineError::NotFound(name.to_string())),
            Err(e) => Err(EngineError::NetworkUnavailable(format!("{name}: {e}"))),
        }
    }

    fn store(&self, path: &Path, template: &GlyphTemplate) -> Result<()> {
        let mut doc = serde_json::to_value(template)?;
        doc["format_version"] = super::FORMAT_VERSION.into();
        write_atomic(path, &to_canonical_json(&doc)?)
    }
}

/// Parses a template document. `format_version`, when present, must be 1.
pub fn parse_template(text: &str, name: &str) -> Result<GlyphTemplate> {
    let malformed = |m: String| EngineError::MalformedTemplate(format!("{name}: {m}"));
    let tree: Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    if let Some(v) = tree.get("format_version") {
        if v.as_u64() != Some(super::FORMAT_VERSION) {
            return Err(EngineError::VersionMismatch {
                found: v.as_u64().unwrap_or(0),
                supported: super::FORMAT_VERSION,
            });
        }
    }
    let template: GlyphTemplate = serde_json::from_value(tree).map_err(|e| malformed(e.to_string()))?;
    template.validate()?;
    Ok(template)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_hit_offline() {
        let dir = tempfile::tempdir().unwrap();
        let client = GalleryClient::new(None, dir.path());
        client.store(&client.cache_path("cube"), &GlyphTemplate::cube()).unwrap();
        assert_eq!(client.fetch_template("cube").unwrap(), GlyphTemplate::cube());
        assert_eq!(
            client.fetch_template("house").unwrap_err().code(),
            "NetworkUnavailable"
        );
    }

    #[test]
    fn malformed() {
        let err = parse_template(r#"{"id":"x","symmetry_orders":[1,1,1]}"#, "x").unwrap_err();
        assert_eq!(err.code(), "MalformedTemplate");
        let mut t = serde_json::to_value(GlyphTemplate::cube()).unwrap();
        t["base_extents"][0] = (-1.0).into();
        assert_eq!(parse_template(&t.to_string(), "cube").unwrap_err().code(), "MalformedTemplate");
    }

    #[test]
    fn rejects_path_names() {
        let client = GalleryClient::new(None, std::env::temp_dir());
        assert_eq!(
            client.fetch_template("../etc").unwrap_err().code(),
            "InvalidArgument"
        );
    }
}
