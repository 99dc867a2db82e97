//! Domain types shared by the engine, the wire protocol and the state file.
//!
//! Every type serializes as a JSON object with snake_case fields; enums
//! serialize as lowercase strings and timestamps are UTC milliseconds.

use std::collections::BTreeSet;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// UTC milliseconds since the Unix epoch.
pub type Millis = i64;

/// Scope key used by progress rows of global achievements.
pub const GLOBAL_SCOPE: &str = "*";

/// Maximum number of achievements pinned to a profile.
pub const SHOWCASE_LIMIT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocatorStrategy {
    Id,
    Name,
    Xpath,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LocatorError {
    #[error("no locator available")]
    NoneAvailable,
    #[error("locator value is empty")]
    EmptyValue,
    #[error("xpath locator must start with '/', '(' or '.': {0:?}")]
    MalformedXpath(String),
}

/// Identification payload for a page element.
///
/// Locators are counted, never evaluated, so the xpath check is only a
/// syntactic sanity test on the first character.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawLocator")]
pub struct Locator {
    strategy: LocatorStrategy,
    value: String,
}

#[derive(Deserialize)]
struct RawLocator {
    strategy: LocatorStrategy,
    value: String,
}

impl TryFrom<RawLocator> for Locator {
    type Error = LocatorError;

    fn try_from(raw: RawLocator) -> Result<Self, Self::Error> {
        Locator::new(raw.strategy, raw.value)
    }
}

impl Locator {
    pub fn new(strategy: LocatorStrategy, value: impl Into<String>) -> Result<Self, LocatorError> {
        let value = value.into();
        if value.is_empty() {
            return Err(LocatorError::EmptyValue);
        }
        if strategy == LocatorStrategy::Xpath && !value.starts_with(['/', '(', '.']) {
            return Err(LocatorError::MalformedXpath(value));
        }
        Ok(Self { strategy, value })
    }

    pub fn strategy(&self) -> LocatorStrategy {
        self.strategy
    }

    pub fn value(&self) -> &str {
        &self.value
    }
}

/// Picks the first non-empty candidate among id, name and xpath.
///
/// Empty strings count as absent, since WebDriver attribute lookups return
/// `""` for missing attributes.
pub fn select_locator(
    id: Option<&str>,
    name: Option<&str>,
    xpath: Option<&str>,
) -> Result<Locator, LocatorError> {
    fn present(v: Option<&str>) -> Option<&str> {
        v.filter(|s| !s.is_empty())
    }
    if let Some(id) = present(id) {
        Locator::new(LocatorStrategy::Id, id)
    } else if let Some(name) = present(name) {
        Locator::new(LocatorStrategy::Name, name)
    } else if let Some(xpath) = present(xpath) {
        Locator::new(LocatorStrategy::Xpath, xpath)
    } else {
        Err(LocatorError::NoneAvailable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Navigate,
    Click,
    SendKeys,
    FindElement,
    PageLoad,
    TestStart,
    TestEnd,
    Other,
}

impl EventKind {
    pub fn requires_url(self) -> bool {
        matches!(self, EventKind::Navigate | EventKind::PageLoad)
    }

    pub fn requires_locator(self) -> bool {
        matches!(self, EventKind::Click | EventKind::SendKeys | EventKind::FindElement)
    }
}

/// One observed WebDriver-level action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestEvent {
    pub kind: EventKind,
    pub timestamp: Millis,
    /// `<suite-or-file>::<test-name>`; empty for session-scoped events.
    #[serde(default)]
    pub test_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locator: Option<Locator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestStatus {
    Passed,
    Failed,
    Error,
    Skipped,
}

impl TestStatus {
    /// Whether the test actually executed (skipped tests did not).
    pub fn ran(self) -> bool {
        !matches!(self, TestStatus::Skipped)
    }

    pub fn is_failing(self) -> bool {
        matches!(self, TestStatus::Failed | TestStatus::Error)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestResult {
    pub test_id: String,
    pub status: TestStatus,
}

/// One test run: its events plus per-test results. The unit of ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionReport {
    pub session_id: String,
    pub project_id: String,
    pub profile_id: String,
    pub started_at: Millis,
    pub finished_at: Millis,
    #[serde(default)]
    pub events: Vec<TestEvent>,
    #[serde(default)]
    pub results: Vec<TestResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterKind {
    PagesVisited,
    SitesVisited,
    Clicks,
    Inputs,
    ElementLookups,
    ElementInteractions,
    TestsRun,
    TestsFixed,
    ProfileCustomizations,
    SessionsCompleted,
}

impl CounterKind {
    pub const ALL: [CounterKind; 10] = [
        CounterKind::PagesVisited,
        CounterKind::SitesVisited,
        CounterKind::Clicks,
        CounterKind::Inputs,
        CounterKind::ElementLookups,
        CounterKind::ElementInteractions,
        CounterKind::TestsRun,
        CounterKind::TestsFixed,
        CounterKind::ProfileCustomizations,
        CounterKind::SessionsCompleted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CounterKind::PagesVisited => "pages_visited",
            CounterKind::SitesVisited => "sites_visited",
            CounterKind::Clicks => "clicks",
            CounterKind::Inputs => "inputs",
            CounterKind::ElementLookups => "element_lookups",
            CounterKind::ElementInteractions => "element_interactions",
            CounterKind::TestsRun => "tests_run",
            CounterKind::TestsFixed => "tests_fixed",
            CounterKind::ProfileCustomizations => "profile_customizations",
            CounterKind::SessionsCompleted => "sessions_completed",
        }
    }
}

impl fmt::Display for CounterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Global,
    Project,
}

/// Octalysis core drive. Descriptive metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreDrive {
    Accomplishment,
    Ownership,
    SocialInfluence,
    Unpredictability,
    Empowerment,
    Meaning,
    Scarcity,
    Avoidance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AchievementDef {
    pub id: String,
    pub name: String,
    pub description: String,
    pub icon_ref: String,
    pub scope: Scope,
    pub counter: CounterKind,
    pub milestones: Vec<u64>,
    pub xp_per_milestone: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub daily_threshold: Option<u64>,
    pub core_drive: CoreDrive,
}

impl AchievementDef {
    /// Number of milestones at or below `counter`.
    pub fn milestones_reached_at(&self, counter: u64) -> u32 {
        self.milestones.iter().take_while(|&&m| m <= counter).count() as u32
    }

    pub fn scope_key<'a>(&self, project_id: &'a str) -> &'a str {
        match self.scope {
            Scope::Global => GLOBAL_SCOPE,
            Scope::Project => project_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AchievementProgress {
    pub achievement_id: String,
    pub scope_key: String,
    pub counter: u64,
    pub milestones_reached: u32,
}

impl AchievementProgress {
    pub fn new(achievement_id: impl Into<String>, scope_key: impl Into<String>) -> Self {
        Self {
            achievement_id: achievement_id.into(),
            scope_key: scope_key.into(),
            counter: 0,
            milestones_reached: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub profile_id: String,
    pub username: String,
    pub level: u8,
    pub xp: u64,
    pub icon_id: String,
    pub title_id: String,
    pub showcase: Vec<String>,
    pub unlocked_icons: BTreeSet<String>,
    pub unlocked_titles: BTreeSet<String>,
    pub customization_count: u64,
}

/// A date-scoped, reduced-threshold instance of a global achievement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyTask {
    pub date: NaiveDate,
    pub achievement_id: String,
    pub threshold: u64,
    pub counter: u64,
    pub completed: bool,
    pub xp_reward: u64,
}
