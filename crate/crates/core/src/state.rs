//! The persisted engine state and its invariants.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalog::{Catalog, MAX_LEVEL};
use crate::model::{AchievementProgress, Profile, Scope, TestStatus, DailyTask, GLOBAL_SCOPE, SHOWCASE_LIMIT};
use crate::progression::level_for_xp;

pub const STATE_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_USERNAME: &str = "tester";

/// Progress rows keyed by `(achievement_id, scope_key)`.
///
/// Serialized as a list ordered by key so the canonical form is stable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProgressTable(BTreeMap<(String, String), AchievementProgress>);

impl ProgressTable {
    pub fn get(&self, achievement_id: &str, scope_key: &str) -> Option<&AchievementProgress> {
        self.0.get(&(achievement_id.to_owned(), scope_key.to_owned()))
    }

    /// Row for the key, created at zero if absent.
    pub fn entry(&mut self, achievement_id: &str, scope_key: &str) -> &mut AchievementProgress {
        self.0
            .entry((achievement_id.to_owned(), scope_key.to_owned()))
            .or_insert_with(|| AchievementProgress::new(achievement_id, scope_key))
    }

    pub fn iter(&self) -> impl Iterator<Item = &AchievementProgress> {
        self.0.values()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Rows of one achievement across every scope.
    pub fn rows_for<'a>(&'a self, achievement_id: &'a str) -> impl Iterator<Item = &'a AchievementProgress> + 'a {
        self.0.values().filter(move |p| p.achievement_id == achievement_id)
    }
}

impl Serialize for ProgressTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.values())
    }
}

impl<'de> Deserialize<'de> for ProgressTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<AchievementProgress>::deserialize(deserializer)?;
        let mut map = BTreeMap::new();
        for row in rows {
            let key = (row.achievement_id.clone(), row.scope_key.clone());
            if map.insert(key, row).is_some() {
                return Err(serde::de::Error::custom("duplicate progress row"));
            }
        }
        Ok(Self(map))
    }
}

/// Last recorded status per project and test.
pub type TestHistory = BTreeMap<String, BTreeMap<String, TestStatus>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineState {
    pub schema_version: u32,
    pub profile: Profile,
    pub progress: ProgressTable,
    pub test_history: TestHistory,
    pub ingested_sessions: BTreeSet<String>,
    pub daily: Option<DailyTask>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("corrupt state: {0}")]
pub struct StateError(pub String);

impl EngineState {
    /// Level 1, no XP, default username and the first level-1 icon and title.
    pub fn fresh(catalog: &Catalog, profile_id: &str) -> Self {
        let unlocks = &catalog.unlock_catalog;
        Self {
            schema_version: STATE_SCHEMA_VERSION,
            profile: Profile {
                profile_id: profile_id.to_owned(),
                username: DEFAULT_USERNAME.to_owned(),
                level: 1,
                xp: 0,
                icon_id: unlocks.first_icon().to_owned(),
                title_id: unlocks.first_title().to_owned(),
                showcase: Vec::new(),
                unlocked_icons: unlocks.icons_up_to(1),
                unlocked_titles: unlocks.titles_up_to(1),
                customization_count: 0,
            },
            progress: ProgressTable::default(),
            test_history: TestHistory::new(),
            ingested_sessions: BTreeSet::new(),
            daily: None,
        }
    }

    /// Whether any scope of the achievement has crossed a milestone.
    pub fn has_earned(&self, achievement_id: &str) -> bool {
        self.progress.rows_for(achievement_id).any(|p| p.milestones_reached >= 1)
    }

    pub fn check_invariants(&self, catalog: &Catalog) -> Result<(), StateError> {
        let fail = |msg: String| Err(StateError(msg));
        if self.schema_version != STATE_SCHEMA_VERSION {
            return fail(format!("schema_version {}", self.schema_version));
        }
        let p = &self.profile;
        let table = &catalog.level_table;
        if p.username.is_empty() {
            return fail("empty username".into());
        }
        if !(1..=MAX_LEVEL).contains(&p.level) || p.level != level_for_xp(p.xp, table) {
            return fail(format!("level {} inconsistent with xp {}", p.level, p.xp));
        }
        if !p.unlocked_icons.contains(&p.icon_id) || !p.unlocked_titles.contains(&p.title_id) {
            return fail("selected icon or title is not unlocked".into());
        }
        if p.showcase.len() > SHOWCASE_LIMIT {
            return fail("showcase exceeds five entries".into());
        }
        for id in &p.showcase {
            if catalog.achievement(id).is_none() || !self.has_earned(id) {
                return fail(format!("showcase entry {id:?} is not an earned achievement"));
            }
        }
        for row in self.progress.iter() {
            let Some(def) = catalog.achievement(&row.achievement_id) else {
                return fail(format!("unknown achievement {:?}", row.achievement_id));
            };
            let global = row.scope_key == GLOBAL_SCOPE;
            if global != (def.scope == Scope::Global) {
                return fail(format!("scope {:?} does not fit {:?}", row.scope_key, def.id));
            }
            if row.milestones_reached != def.milestones_reached_at(row.counter) {
                return fail(format!("milestones_reached inconsistent for {:?}", def.id));
            }
        }
        if let Some(daily) = &self.daily {
            let Some(def) = catalog.achievement(&daily.achievement_id) else {
                return fail(format!("unknown daily achievement {:?}", daily.achievement_id));
            };
            if def.daily_threshold != Some(daily.threshold) || daily.completed != (daily.counter >= daily.threshold) {
                return fail("daily task inconsistent with catalog".into());
            }
        }
        Ok(())
    }
}
