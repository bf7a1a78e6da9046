use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("activity catalog needs at least two labels, got {0}")]
    TooFew(usize),
    #[error("labels `{0}` and `{1}` collide after normalization")]
    Duplicate(String, String),
    #[error("fallback label `{0}` is not in the catalog")]
    MissingFallback(String),
    #[error("alias `{alias}` points at unknown label `{label}`")]
    DanglingAlias { alias: String, label: String },
    #[error("activity catalog is empty")]
    Empty,
}

/// Case-folds, trims and collapses internal whitespace runs to one space.
pub fn normalize_label(raw: &str) -> String {
    raw.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Closed, ordered set of activity labels plus the catch-all label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CatalogDoc", into = "CatalogDoc")]
pub struct ActivityCatalog {
    labels: Vec<String>,
    fallback: usize,
    /// normalized raw annotation name -> index into `labels`
    aliases: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogDoc {
    labels: Vec<String>,
    #[serde(default = "default_fallback")]
    fallback: String,
    #[serde(default)]
    aliases: BTreeMap<String, String>,
}

fn default_fallback() -> String {
    "other".to_string()
}

impl TryFrom<CatalogDoc> for ActivityCatalog {
    type Error = CatalogError;

    fn try_from(doc: CatalogDoc) -> Result<Self, Self::Error> {
        let mut catalog = ActivityCatalog::new(doc.labels, &doc.fallback)?;
        for (alias, label) in doc.aliases {
            catalog.add_alias(&alias, &label)?;
        }
        Ok(catalog)
    }
}

impl From<ActivityCatalog> for CatalogDoc {
    fn from(c: ActivityCatalog) -> Self {
        let aliases = c
            .aliases
            .iter()
            .map(|(alias, &idx)| (alias.clone(), c.labels[idx].clone()))
            .collect();
        CatalogDoc {
            fallback: c.labels[c.fallback].clone(),
            labels: c.labels,
            aliases,
        }
    }
}

impl ActivityCatalog {
    pub fn new<S: Into<String>>(labels: Vec<S>, fallback: &str) -> Result<Self, CatalogError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(CatalogError::Empty);
        }
        if labels.len() < 2 {
            return Err(CatalogError::TooFew(labels.len()));
        }
        let mut seen: BTreeMap<String, &str> = BTreeMap::new();
        for label in &labels {
            if let Some(prev) = seen.insert(normalize_label(label), label) {
                return Err(CatalogError::Duplicate(prev.to_string(), label.clone()));
            }
        }
        let key = normalize_label(fallback);
        let fallback = labels
            .iter()
            .position(|l| normalize_label(l) == key)
            .ok_or_else(|| CatalogError::MissingFallback(fallback.to_string()))?;
        Ok(ActivityCatalog {
            labels,
            fallback,
            aliases: BTreeMap::new(),
        })
    }

    /// Maps a raw dataset annotation (e.g. `Meal_Preparation`) onto a label.
    pub fn add_alias(&mut self, alias: &str, label: &str) -> Result<(), CatalogError> {
        let idx = self.index_of(label).ok_or_else(|| CatalogError::DanglingAlias {
            alias: alias.to_string(),
            label: label.to_string(),
        })?;
        self.aliases.insert(normalize_label(alias), idx);
        Ok(())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn fallback(&self) -> &str {
        &self.labels[self.fallback]
    }

    pub fn index_of(&self, raw: &str) -> Option<usize> {
        let key = normalize_label(raw);
        self.labels.iter().position(|l| normalize_label(l) == key)
    }

    /// Canonical label for `raw` under normalization; no fuzzy matching.
    pub fn lookup(&self, raw: &str) -> Option<&str> {
        self.index_of(raw).map(|i| self.labels[i].as_str())
    }

    pub fn contains(&self, raw: &str) -> bool {
        self.index_of(raw).is_some()
    }

    /// Resolves an annotation token from a log: aliases first, then the label
    /// itself with underscores read as spaces.
    pub fn resolve_annotation(&self, raw: &str) -> Option<&str> {
        if let Some(&idx) = self.aliases.get(&normalize_label(raw)) {
            return Some(&self.labels[idx]);
        }
        self.lookup(raw).or_else(|| self.lookup(&raw.replace('_', " ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> ActivityCatalog {
        ActivityCatalog::new(vec!["Sleeping", "preparing meal", "other"], "other").unwrap()
    }

    #[test]
    fn normalization_collapses_whitespace_and_case() {
        assert_eq!(normalize_label("  Preparing \t  MEAL "), "preparing meal");
    }

    #[test]
    fn lookup_is_normalized_not_fuzzy() {
        let c = catalog();
        assert_eq!(c.lookup("SLEEPING"), Some("Sleeping"));
        assert_eq!(c.lookup("preparing   meal"), Some("preparing meal"));
        assert_eq!(c.lookup("sleep"), None);
        assert_eq!(c.lookup("preparing meals"), None);
    }

    #[test]
    fn rejects_bad_catalogs() {
        assert_eq!(
            ActivityCatalog::new(Vec::<String>::new(), "other").unwrap_err(),
            CatalogError::Empty
        );
        assert_eq!(ActivityCatalog::new(vec!["other"], "other").unwrap_err(), CatalogError::TooFew(1));
        assert!(matches!(
            ActivityCatalog::new(vec!["Eating", " eating "], "Eating"),
            Err(CatalogError::Duplicate(..))
        ));
        assert!(matches!(
            ActivityCatalog::new(vec!["a", "b"], "other"),
            Err(CatalogError::MissingFallback(_))
        ));
    }

    #[test]
    fn annotations_resolve_through_aliases() {
        let mut c = catalog();
        c.add_alias("Meal_Preparation", "preparing meal").unwrap();
        assert_eq!(c.resolve_annotation("Meal_Preparation"), Some("preparing meal"));
        assert_eq!(c.resolve_annotation("preparing_meal"), Some("preparing meal"));
        assert_eq!(c.resolve_annotation("Sleeping"), Some("Sleeping"));
        assert_eq!(c.resolve_annotation("Respirate"), None);
        assert!(c.add_alias("x", "nope").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let doc = r#"
            labels = ["sleeping", "eating", "other"]
            fallback = "other"
            [aliases]
            Sleep = "sleeping"
        "#;
        let c: ActivityCatalog = toml::from_str(doc).unwrap();
        assert_eq!(c.resolve_annotation("Sleep"), Some("sleeping"));
        let back: ActivityCatalog = toml::from_str(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
