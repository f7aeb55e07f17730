use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GuidanceError;
use crate::model::Attribute;

/// The shipped catalog, embedded at build time.
pub const DEFAULT_CATALOG: &str = include_str!("../../data/suggestions.toml");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionEntry {
    pub id: String,
    pub text: String,
}

/// Versioned map from attribute to its improvement suggestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionCatalog {
    pub version: u32,
    pub suggestions: BTreeMap<Attribute, SuggestionEntry>,
}

impl SuggestionCatalog {
    /// Every attribute must have a non-empty id; ids must be unique.
    pub fn parse(text: &str) -> Result<Self, GuidanceError> {
        let cat: Self = toml::from_str(text).map_err(|e| GuidanceError::Catalog(e.to_string()))?;
        for a in Attribute::ALL {
            match cat.suggestions.get(&a) {
                Some(e) if !e.id.trim().is_empty() => {}
                _ => return Err(GuidanceError::Catalog(format!("missing suggestion for {a}"))),
            }
        }
        let mut ids: Vec<_> = cat.suggestions.values().map(|e| e.id.as_str()).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(GuidanceError::Catalog("duplicate suggestion id".into()));
        }
        Ok(cat)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GuidanceError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn entry(&self, a: Attribute) -> &SuggestionEntry {
        &self.suggestions[&a]
    }
}

impl Default for SuggestionCatalog {
    fn default() -> Self {
        Self::parse(DEFAULT_CATALOG).expect("bundled catalog is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_catalog_is_complete() {
        let c = SuggestionCatalog::default();
        assert_eq!(c.version, 1);
        assert_eq!(c.suggestions.len(), 6);
        assert_eq!(c.entry(Attribute::GoodLighting).id, "improve-lighting");
    }

    #[test]
    fn incomplete_catalog_rejected() {
        let text = "version = 1\n[suggestions.vivid_color]\nid = \"x\"\ntext = \"y\"\n";
        assert!(matches!(SuggestionCatalog::parse(text), Err(GuidanceError::Catalog(_))));
        let dup = DEFAULT_CATALOG.replace("boost-color", "use-thirds");
        assert!(SuggestionCatalog::parse(&dup).is_err());
    }
}
