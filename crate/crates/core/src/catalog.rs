//! Achievement catalog, level table and unlockables.
//!
//! The catalog is data: a JSON document loaded at startup. A copy of the
//! default catalog is compiled in and used when no file is configured.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{AchievementDef, Scope};

pub const CATALOG_SCHEMA_VERSION: u32 = 1;
pub const MAX_LEVEL: u8 = 10;

const DEFAULT_CATALOG_JSON: &str = include_str!("default_catalog.json");

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("cannot read catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("catalog parse error at line {line}, column {column} (field `{field}`): {message}")]
    Parse { line: usize, column: usize, field: String, message: String },
    #[error("invalid catalog field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> CatalogError {
    CatalogError::Invalid { field: field.into(), reason: reason.into() }
}

/// Cumulative XP required to hold each level; entry `n - 1` is level `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelTable {
    pub cumulative_xp: Vec<u64>,
}

impl LevelTable {
    pub fn validate(&self) -> Result<(), CatalogError> {
        if self.cumulative_xp.len() != MAX_LEVEL as usize {
            return Err(invalid("level_table.cumulative_xp", "must have exactly 10 entries"));
        }
        if self.cumulative_xp[0] != 0 {
            return Err(invalid("level_table.cumulative_xp[0]", "must be 0"));
        }
        if let Some(i) = self.cumulative_xp.windows(2).position(|w| w[0] >= w[1]) {
            return Err(invalid(
                format!("level_table.cumulative_xp[{}]", i + 1),
                "must be strictly increasing",
            ));
        }
        Ok(())
    }

    /// XP needed to hold `level`.
    pub fn floor(&self, level: u8) -> u64 {
        self.cumulative_xp[usize::from(level.clamp(1, MAX_LEVEL)) - 1]
    }

    /// XP needed to reach the level after `level`; `None` at the top level.
    pub fn next_threshold(&self, level: u8) -> Option<u64> {
        self.cumulative_xp.get(usize::from(level)).copied()
    }
}

impl Default for LevelTable {
    fn default() -> Self {
        Self { cumulative_xp: vec![0, 100, 300, 600, 1000, 1500, 2100, 2800, 3600, 4500] }
    }
}

/// Icons and titles keyed by the level that unlocks them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnlockCatalog {
    pub icons: BTreeMap<u8, Vec<String>>,
    pub titles: BTreeMap<u8, Vec<String>>,
}

impl UnlockCatalog {
    pub fn validate(&self) -> Result<(), CatalogError> {
        let mut seen = HashSet::new();
        for (name, table) in [("icons", &self.icons), ("titles", &self.titles)] {
            for (&level, ids) in table {
                if !(1..=MAX_LEVEL).contains(&level) {
                    return Err(invalid(format!("unlock_catalog.{name}.{level}"), "level must be 1-10"));
                }
                for id in ids {
                    if id.is_empty() {
                        return Err(invalid(format!("unlock_catalog.{name}.{level}"), "empty id"));
                    }
                    if !seen.insert(id.as_str()) {
                        return Err(invalid(
                            format!("unlock_catalog.{name}.{level}"),
                            format!("duplicate id {id:?}"),
                        ));
                    }
                }
            }
            // anything reachable at level 1 is reachable at every level
            if table.get(&1).is_none_or(|ids| ids.is_empty()) {
                return Err(invalid(format!("unlock_catalog.{name}.1"), "level 1 needs at least one entry"));
            }
        }
        Ok(())
    }

    pub fn first_icon(&self) -> &str {
        &self.icons[&1][0]
    }

    pub fn first_title(&self) -> &str {
        &self.titles[&1][0]
    }

    pub fn icon_level(&self, id: &str) -> Option<u8> {
        level_of(&self.icons, id)
    }

    pub fn title_level(&self, id: &str) -> Option<u8> {
        level_of(&self.titles, id)
    }

    pub fn icons_up_to(&self, level: u8) -> BTreeSet<String> {
        up_to(&self.icons, level)
    }

    pub fn titles_up_to(&self, level: u8) -> BTreeSet<String> {
        up_to(&self.titles, level)
    }
}

fn level_of(table: &BTreeMap<u8, Vec<String>>, id: &str) -> Option<u8> {
    table.iter().find(|(_, ids)| ids.iter().any(|i| i == id)).map(|(&l, _)| l)
}

fn up_to(table: &BTreeMap<u8, Vec<String>>, level: u8) -> BTreeSet<String> {
    table.range(..=level).flat_map(|(_, ids)| ids.iter().cloned()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub schema_version: u32,
    pub achievements: Vec<AchievementDef>,
    pub level_table: LevelTable,
    pub unlock_catalog: UnlockCatalog,
}

impl Catalog {
    /// The compiled-in default catalog.
    pub fn default_catalog() -> Self {
        Self::from_json(DEFAULT_CATALOG_JSON).expect("bundled catalog is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let catalog: Catalog = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            CatalogError::Parse {
                line: inner.line(),
                column: inner.column(),
                field,
                message: inner.to_string(),
            }
        })?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn load(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CatalogError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        if self.schema_version != CATALOG_SCHEMA_VERSION {
            return Err(invalid("schema_version", format!("unsupported version {}", self.schema_version)));
        }
        let mut ids = HashSet::new();
        for (i, def) in self.achievements.iter().enumerate() {
            let at = |f: &str| format!("achievements[{i}].{f}");
            if def.id.is_empty() {
                return Err(invalid(at("id"), "must be non-empty"));
            }
            if !ids.insert(def.id.as_str()) {
                return Err(invalid(at("id"), format!("duplicate id {:?}", def.id)));
            }
            if def.milestones.is_empty() || def.milestones.len() > 5 {
                return Err(invalid(at("milestones"), "must have 1 to 5 entries"));
            }
            if def.milestones[0] == 0 {
                return Err(invalid(at("milestones"), "must be positive"));
            }
            if def.milestones.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid(at("milestones"), "must be strictly increasing"));
            }
            if def.xp_per_milestone.len() != def.milestones.len() {
                return Err(invalid(at("xp_per_milestone"), "length must match milestones"));
            }
            if def.xp_per_milestone.contains(&0) {
                return Err(invalid(at("xp_per_milestone"), "must be positive"));
            }
            if let Some(t) = def.daily_threshold {
                let first = def.milestones[0];
                let lower = match def.scope {
                    Scope::Global => t <= first,
                    Scope::Project => t < first,
                };
                if t == 0 || !lower {
                    return Err(invalid(
                        at("daily_threshold"),
                        "must be positive and lower than the first milestone",
                    ));
                }
            }
        }
        self.level_table.validate()?;
        self.unlock_catalog.validate()
    }

    pub fn achievement(&self, id: &str) -> Option<&AchievementDef> {
        self.achievements.iter().find(|d| d.id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CounterKind;

    #[test]
    fn default_catalog_matches_documented_shape() {
        let c = Catalog::default_catalog();
        assert_eq!(c.achievements.len(), 10);
        assert_eq!(c.level_table, LevelTable::default());
        let clicker = c.achievement("clicker").unwrap();
        assert_eq!(clicker.scope, Scope::Project);
        assert_eq!(clicker.milestones, [10, 50, 200]);
        assert_eq!(clicker.xp_per_milestone, [25, 50, 100]);
        let identity = c.achievement("identity").unwrap();
        assert_eq!((identity.counter, identity.milestones.as_slice()), (CounterKind::ProfileCustomizations, &[1][..]));
        assert_eq!(identity.xp_per_milestone, [25]);
        let eligible: Vec<_> = c
            .achievements
            .iter()
            .filter(|d| d.scope == Scope::Global && d.daily_threshold.is_some())
            .map(|d| d.id.as_str())
            .collect();
        assert_eq!(eligible.len(), 5);
        for level in 1..=MAX_LEVEL {
            assert!(!c.unlock_catalog.icons[&level].is_empty());
            assert!(!c.unlock_catalog.titles[&level].is_empty());
        }
    }

    #[test]
    fn parse_errors_carry_line_and_field() {
        let text = "{\n  \"schema_version\": 1,\n  \"achievements\": 7\n}";
        match Catalog::from_json(text) {
            Err(CatalogError::Parse { line, field, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(field, "achievements");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let mut c = Catalog::default_catalog();
        c.achievements[1].milestones = vec![10, 10, 200];
        assert!(matches!(c.validate(), Err(CatalogError::Invalid { field, .. }) if field == "achievements[1].milestones"));

        let mut c = Catalog::default_catalog();
        c.achievements[0].daily_threshold = Some(5); // project def, equal to first milestone
        assert!(matches!(c.validate(), Err(CatalogError::Invalid { field, .. }) if field == "achievements[0].daily_threshold"));

        let mut c = Catalog::default_catalog();
        c.achievements[2].id = "explorer".into();
        assert!(c.validate().is_err());

        let mut c = Catalog::default_catalog();
        c.level_table.cumulative_xp[4] = 600;
        assert!(matches!(c.validate(), Err(CatalogError::Invalid { field, .. }) if field == "level_table.cumulative_xp[4]"));

        let mut c = Catalog::default_catalog();
        c.unlock_catalog.titles.insert(3, vec!["icon-bug".into()]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn unlock_lookups() {
        let u = Catalog::default_catalog().unlock_catalog;
        assert_eq!(u.first_icon(), "icon-cursor");
        assert_eq!(u.first_title(), "title-novice");
        assert_eq!(u.icon_level("icon-shield"), Some(5));
        assert_eq!(u.title_level("nope"), None);
        assert_eq!(u.icons_up_to(1).len(), 2);
        assert_eq!(u.titles_up_to(10).len(), 10);
    }

    #[test]
    fn level_table_helpers() {
        let t = LevelTable::default();
        assert_eq!(t.floor(1), 0);
        assert_eq!(t.next_threshold(1), Some(100));
        assert_eq!(t.next_threshold(10), None);
    }
}
