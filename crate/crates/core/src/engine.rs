//! The achievement service: turns session reports and profile edits into
//! progress, XP, levels, unlocks and daily-task updates.
//!
//! Every entry point takes the current state by reference and returns a
//! new state, so a failed call never leaves a half-applied update behind.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::daily::select_daily_task;
use crate::model::{CounterKind, Scope, SessionReport, TestStatus, SHOWCASE_LIMIT};
use crate::progression::{apply_progress, award_xp, resolve_unlocks};
use crate::report::count_all;
use crate::state::{EngineState, TestHistory};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("corrupt state: {0}")]
    CorruptState(String),
    #[error("profile mismatch: report is for {report:?}, engine holds {engine:?}")]
    ProfileMismatch { report: String, engine: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MilestoneCrossing {
    pub achievement_id: String,
    pub scope_key: String,
    pub milestone_index: usize,
    pub xp_awarded: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyProgress {
    pub counter_after: u64,
    pub completed_now: bool,
    pub xp_awarded: u64,
}

/// What one ingest or profile edit changed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOutcome {
    /// Absent for outcomes of profile edits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    pub duplicate: bool,
    pub counter_deltas: BTreeMap<CounterKind, u64>,
    pub milestones_crossed: Vec<MilestoneCrossing>,
    pub daily_progress: Option<DailyProgress>,
    /// Set when no calendar date was available and the daily step was skipped.
    pub daily_skipped: bool,
    pub xp_total_awarded: u64,
    pub level_before: u8,
    pub level_after: u8,
    pub newly_unlocked_icons: Vec<String>,
    pub newly_unlocked_titles: Vec<String>,
    pub fixed_tests: Vec<String>,
}

impl IngestOutcome {
    /// An outcome that changed nothing.
    pub fn empty(session_id: Option<String>, level: u8) -> Self {
        Self {
            session_id,
            duplicate: false,
            counter_deltas: CounterKind::ALL.iter().map(|&k| (k, 0)).collect(),
            milestones_crossed: Vec::new(),
            daily_progress: None,
            daily_skipped: false,
            xp_total_awarded: 0,
            level_before: level,
            level_after: level,
            newly_unlocked_icons: Vec::new(),
            newly_unlocked_titles: Vec::new(),
            fixed_tests: Vec::new(),
        }
    }

    fn duplicate(session_id: &str, level: u8) -> Self {
        Self { duplicate: true, ..Self::empty(Some(session_id.to_owned()), level) }
    }
}

/// Tests that were failing (failed or error) in the project's history and
/// pass in this report, sorted by id. Records every result of the report.
pub fn detect_fixed_tests(history: &mut TestHistory, report: &SessionReport) -> Vec<String> {
    let project = history.entry(report.project_id.clone()).or_default();
    let mut fixed = Vec::new();
    for result in &report.results {
        let previous = project.insert(result.test_id.clone(), result.status);
        if result.status == TestStatus::Passed && previous.is_some_and(TestStatus::is_failing) {
            fixed.push(result.test_id.clone());
        }
    }
    fixed.sort();
    fixed
}

/// Makes `state.daily` the task for `today`, selecting a new one when the
/// stored task is absent or from another day. An incomplete task from an
/// earlier day is discarded.
pub fn refresh_daily(state: &mut EngineState, catalog: &Catalog, today: NaiveDate) {
    if state.daily.as_ref().is_some_and(|d| d.date == today) {
        return;
    }
    state.daily = select_daily_task(today, &state.profile.profile_id, &catalog.achievements).ok();
}

fn ensure_known_rows(state: &EngineState, catalog: &Catalog) -> Result<(), EngineError> {
    for row in state.progress.iter() {
        if catalog.achievement(&row.achievement_id).is_none() {
            return Err(EngineError::CorruptState(format!(
                "progress references unknown achievement {:?}",
                row.achievement_id
            )));
        }
    }
    Ok(())
}

/// Applies counter deltas to progress rows, the daily task and the profile.
/// `project_id` is `None` when there is no project context (profile edits),
/// in which case project-scoped achievements are left alone.
fn apply_deltas(
    state: &mut EngineState,
    catalog: &Catalog,
    project_id: Option<&str>,
    today: Option<NaiveDate>,
    outcome: &mut IngestOutcome,
) {
    let mut defs: Vec<_> = catalog.achievements.iter().collect();
    defs.sort_by(|a, b| a.id.cmp(&b.id));

    let mut xp = 0u64;
    for def in defs {
        let delta = outcome.counter_deltas.get(&def.counter).copied().unwrap_or(0);
        if delta == 0 {
            continue;
        }
        let scope_key = match (def.scope, project_id) {
            (Scope::Global, _) => def.scope_key(""),
            (Scope::Project, Some(project)) => project,
            (Scope::Project, None) => continue,
        };
        let row = state.progress.entry(&def.id, scope_key);
        for index in apply_progress(row, delta, def) {
            let award = def.xp_per_milestone[index];
            xp += award;
            outcome.milestones_crossed.push(MilestoneCrossing {
                achievement_id: def.id.clone(),
                scope_key: scope_key.to_owned(),
                milestone_index: index,
                xp_awarded: award,
            });
        }
    }

    match today {
        None => outcome.daily_skipped = true,
        Some(today) => {
            refresh_daily(state, catalog, today);
            if let Some(daily) = state.daily.as_mut() {
                let counter = catalog.achievement(&daily.achievement_id).map(|d| d.counter);
                let delta = counter.and_then(|k| outcome.counter_deltas.get(&k)).copied().unwrap_or(0);
                if delta > 0 {
                    daily.counter = daily.counter.saturating_add(delta);
                    let completed_now = !daily.completed && daily.counter >= daily.threshold;
                    daily.completed = daily.counter >= daily.threshold;
                    let award = if completed_now { daily.xp_reward } else { 0 };
                    xp += award;
                    outcome.daily_progress = Some(DailyProgress {
                        counter_after: daily.counter,
                        completed_now,
                        xp_awarded: award,
                    });
                }
            }
        }
    }

    let level_before = state.profile.level;
    award_xp(&mut state.profile, xp, &catalog.level_table);
    let level_after = state.profile.level;
    let (icons, titles) = resolve_unlocks(level_before, level_after, &catalog.unlock_catalog);
    state.profile.unlocked_icons.extend(icons.iter().cloned());
    state.profile.unlocked_titles.extend(titles.iter().cloned());

    outcome.xp_total_awarded = xp;
    outcome.level_before = level_before;
    outcome.level_after = level_after;
    outcome.newly_unlocked_icons = icons;
    outcome.newly_unlocked_titles = titles;
}

/// Ingests one validated report. A report whose session was already
/// ingested returns the state unchanged with a duplicate outcome.
pub fn ingest_report(
    state: &EngineState,
    catalog: &Catalog,
    report: &SessionReport,
    today: Option<NaiveDate>,
) -> Result<(EngineState, IngestOutcome), EngineError> {
    if report.profile_id != state.profile.profile_id {
        return Err(EngineError::ProfileMismatch {
            report: report.profile_id.clone(),
            engine: state.profile.profile_id.clone(),
        });
    }
    if state.ingested_sessions.contains(&report.session_id) {
        return Ok((state.clone(), IngestOutcome::duplicate(&report.session_id, state.profile.level)));
    }
    ensure_known_rows(state, catalog)?;

    let mut next = state.clone();
    let mut outcome = IngestOutcome::empty(Some(report.session_id.clone()), state.profile.level);
    outcome.counter_deltas = count_all(report);
    let fixed = detect_fixed_tests(&mut next.test_history, report);
    outcome.counter_deltas.insert(CounterKind::TestsFixed, fixed.len() as u64);
    outcome.fixed_tests = fixed;

    apply_deltas(&mut next, catalog, Some(&report.project_id), today, &mut outcome);
    next.ingested_sessions.insert(report.session_id.clone());
    Ok((next, outcome))
}

/// Counts one profile customization and feeds it through the same
/// milestone and XP machinery as a report.
pub fn record_profile_customization(
    state: &EngineState,
    catalog: &Catalog,
    today: Option<NaiveDate>,
) -> Result<(EngineState, IngestOutcome), EngineError> {
    ensure_known_rows(state, catalog)?;
    let mut next = state.clone();
    next.profile.customization_count += 1;
    let mut outcome = IngestOutcome::empty(None, state.profile.level);
    outcome.counter_deltas.insert(CounterKind::ProfileCustomizations, 1);
    apply_deltas(&mut next, catalog, None, today, &mut outcome);
    Ok((next, outcome))
}

/// Requested profile changes; absent fields are left as they are.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileEdit {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub username: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub icon_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub showcase: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProfileError {
    #[error("username must be non-empty")]
    EmptyUsername,
    #[error("icon {0:?} is not unlocked")]
    IconLocked(String),
    #[error("title {0:?} is not unlocked")]
    TitleLocked(String),
    #[error("showcase holds at most {SHOWCASE_LIMIT} achievements, got {0}")]
    ShowcaseTooLarge(usize),
    #[error("showcase entry {0:?} is not an earned achievement")]
    ShowcaseUnearned(String),
    #[error("showcase entry {0:?} appears twice")]
    ShowcaseDuplicate(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl ProfileError {
    /// Name of the offending request field, if any.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            ProfileError::EmptyUsername => Some("username"),
            ProfileError::IconLocked(_) => Some("icon_id"),
            ProfileError::TitleLocked(_) => Some("title_id"),
            ProfileError::ShowcaseTooLarge(_)
            | ProfileError::ShowcaseUnearned(_)
            | ProfileError::ShowcaseDuplicate(_) => Some("showcase"),
            ProfileError::Engine(_) => None,
        }
    }
}

/// Validates and applies a profile edit. An edit that changes something
/// counts as one customization; a no-op edit returns an empty outcome, so
/// retrying the same request is harmless.
pub fn customize_profile(
    state: &EngineState,
    catalog: &Catalog,
    edit: &ProfileEdit,
    today: Option<NaiveDate>,
) -> Result<(EngineState, IngestOutcome), ProfileError> {
    let profile = &state.profile;
    if let Some(name) = &edit.username {
        if name.trim().is_empty() {
            return Err(ProfileError::EmptyUsername);
        }
    }
    if let Some(icon) = &edit.icon_id {
        if !profile.unlocked_icons.contains(icon) {
            return Err(ProfileError::IconLocked(icon.clone()));
        }
    }
    if let Some(title) = &edit.title_id {
        if !profile.unlocked_titles.contains(title) {
            return Err(ProfileError::TitleLocked(title.clone()));
        }
    }
    if let Some(showcase) = &edit.showcase {
        if showcase.len() > SHOWCASE_LIMIT {
            return Err(ProfileError::ShowcaseTooLarge(showcase.len()));
        }
        for (i, id) in showcase.iter().enumerate() {
            if showcase[..i].contains(id) {
                return Err(ProfileError::ShowcaseDuplicate(id.clone()));
            }
            if catalog.achievement(id).is_none() || !state.has_earned(id) {
                return Err(ProfileError::ShowcaseUnearned(id.clone()));
            }
        }
    }

    let mut edited = state.clone();
    let p = &mut edited.profile;
    if let Some(v) = &edit.username {
        p.username = v.clone();
    }
    if let Some(v) = &edit.icon_id {
        p.icon_id = v.clone();
    }
    if let Some(v) = &edit.title_id {
        p.title_id = v.clone();
    }
    if let Some(v) = &edit.showcase {
        p.showcase = v.clone();
    }
    if edited.profile == state.profile {
        return Ok((edited, IngestOutcome::empty(None, state.profile.level)));
    }
    Ok(record_profile_customization(&edited, catalog, today)?)
}
