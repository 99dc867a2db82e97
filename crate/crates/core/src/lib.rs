//! Gamification engine for scripted GUI testing.
//!
//! Session reports of WebDriver-level events are validated
//! ([`report::validate_report`]), reduced to counters
//! ([`report::count_events`]) and fed through the achievement rules
//! ([`engine::ingest_report`]), which update milestone progress, XP,
//! levels, unlockables and the daily task. [`persistence`] keeps the
//! resulting [`state::EngineState`] on disk between runs.

pub mod catalog;
pub mod clock;
pub mod daily;
pub mod engine;
pub mod model;
pub mod persistence;
pub mod progression;
pub mod report;
pub mod service;
pub mod simulate;
pub mod state;

pub use catalog::{Catalog, CatalogError, LevelTable, UnlockCatalog};
pub use clock::Clock;
pub use daily::select_daily_task;
pub use engine::{
    customize_profile, detect_fixed_tests, ingest_report, record_profile_customization, EngineError,
    IngestOutcome, ProfileEdit, ProfileError,
};
pub use model::*;
pub use progression::{apply_progress, award_xp, level_for_xp, resolve_unlocks};
pub use report::{count_events, validate_report, ReportError};
pub use service::{Service, ServiceError};
pub use state::EngineState;
