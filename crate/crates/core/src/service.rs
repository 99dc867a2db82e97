//! Engine state owned by a single writer and persisted after every change.
//!
//! Both the HTTP server and the offline CLI drive the engine through
//! [`Service`]. Mutations compute the next state from a copy, save it, and
//! only then replace the in-memory state, so a failed save leaves both
//! memory and disk as they were.

use std::path::{Path, PathBuf};
use std::sync::{Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, UnlockCatalog};
use crate::clock::Clock;
use crate::daily::{select_daily_task, NoDailyCandidates};
use crate::engine::{self, EngineError, IngestOutcome, ProfileEdit, ProfileError};
use crate::model::{AchievementDef, AchievementProgress, DailyTask, Profile, SessionReport, GLOBAL_SCOPE};
use crate::persistence::{load_state, save_state, PersistError};
use crate::report::{validate_report, ReportError};
use crate::state::EngineState;

pub const STATE_FILE_NAME: &str = "state.json";

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error(transparent)]
    NoDaily(#[from] NoDailyCandidates),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AchievementView {
    pub def: AchievementDef,
    /// Row under `"*"`; present for global achievements.
    pub global_progress: Option<AchievementProgress>,
    /// Row for the requested project; present for project achievements
    /// when a project was given.
    pub project_progress: Option<AchievementProgress>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LockState {
    Unlocked,
    Locked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnlockableItem {
    pub id: String,
    pub required_level: u8,
    pub state: LockState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnlockablesView {
    pub icons: Vec<UnlockableItem>,
    pub titles: Vec<UnlockableItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileUpdate {
    pub profile: Profile,
    pub outcome: IngestOutcome,
}

/// Lock state of every icon and title for a profile at `level`.
pub fn unlockables_for(level: u8, unlocks: &UnlockCatalog) -> UnlockablesView {
    let items = |table: &std::collections::BTreeMap<u8, Vec<String>>| {
        table
            .iter()
            .flat_map(|(&required_level, ids)| {
                ids.iter().map(move |id| UnlockableItem {
                    id: id.clone(),
                    required_level,
                    state: if required_level <= level { LockState::Unlocked } else { LockState::Locked },
                })
            })
            .collect()
    };
    UnlockablesView { icons: items(&unlocks.icons), titles: items(&unlocks.titles) }
}

/// Per-achievement progress for display, ordered by id.
pub fn achievement_views(state: &EngineState, catalog: &Catalog, project_id: Option<&str>) -> Vec<AchievementView> {
    let row = |def: &AchievementDef, scope: &str| {
        state.progress.get(&def.id, scope).cloned().unwrap_or_else(|| {
            AchievementProgress::new(def.id.clone(), scope)
        })
    };
    let mut views: Vec<_> = catalog
        .achievements
        .iter()
        .map(|def| match def.scope {
            crate::model::Scope::Global => AchievementView {
                def: def.clone(),
                global_progress: Some(row(def, GLOBAL_SCOPE)),
                project_progress: None,
            },
            crate::model::Scope::Project => AchievementView {
                def: def.clone(),
                global_progress: None,
                project_progress: project_id.map(|p| row(def, p)),
            },
        })
        .collect();
    views.sort_by(|a, b| a.def.id.cmp(&b.def.id));
    views
}

pub struct Service {
    catalog: Catalog,
    clock: Clock,
    state_path: PathBuf,
    state: Mutex<EngineState>,
}

impl Service {
    /// Loads (or creates) the state file in `data_dir`. `profile_id` names
    /// the profile of a fresh state; an existing file keeps its own.
    pub fn open(data_dir: &Path, catalog: Catalog, clock: Clock, profile_id: &str) -> Result<Self, PersistError> {
        let state_path = data_dir.join(STATE_FILE_NAME);
        let loaded = load_state(&state_path, &catalog, profile_id)?;
        Ok(Self { catalog, clock, state_path, state: Mutex::new(loaded.state) })
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn state_path(&self) -> &Path {
        &self.state_path
    }

    fn lock(&self) -> MutexGuard<'_, EngineState> {
        self.state.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    /// A consistent copy of the current state.
    pub fn snapshot(&self) -> EngineState {
        self.lock().clone()
    }

    fn commit(&self, guard: &mut EngineState, next: EngineState) -> Result<(), PersistError> {
        if next != *guard {
            save_state(&self.state_path, &next)?;
            *guard = next;
        }
        Ok(())
    }

    pub fn ingest(&self, report: SessionReport) -> Result<IngestOutcome, ServiceError> {
        let report = validate_report(report)?;
        let mut guard = self.lock();
        let (next, outcome) = engine::ingest_report(&guard, &self.catalog, &report, self.clock.today())?;
        self.commit(&mut guard, next)?;
        Ok(outcome)
    }

    pub fn profile(&self) -> Profile {
        self.lock().profile.clone()
    }

    pub fn edit_profile(&self, edit: &ProfileEdit) -> Result<ProfileUpdate, ServiceError> {
        let mut guard = self.lock();
        let (next, outcome) = engine::customize_profile(&guard, &self.catalog, edit, self.clock.today())?;
        self.commit(&mut guard, next)?;
        Ok(ProfileUpdate { profile: guard.profile.clone(), outcome })
    }

    pub fn achievements(&self, project_id: Option<&str>) -> Vec<AchievementView> {
        achievement_views(&self.lock(), &self.catalog, project_id)
    }

    /// Today's task, selected and stored on the first request of the day.
    pub fn daily_task(&self) -> Result<DailyTask, ServiceError> {
        let mut guard = self.lock();
        let Some(today) = self.clock.today() else {
            return Err(NoDailyCandidates.into());
        };
        if let Some(task) = guard.daily.as_ref().filter(|d| d.date == today) {
            return Ok(task.clone());
        }
        let task = select_daily_task(today, &guard.profile.profile_id, &self.catalog.achievements)?;
        let mut next = guard.clone();
        next.daily = Some(task.clone());
        self.commit(&mut guard, next)?;
        Ok(task)
    }

    pub fn unlockables(&self) -> UnlockablesView {
        unlockables_for(self.lock().profile.level, &self.catalog.unlock_catalog)
    }
}
