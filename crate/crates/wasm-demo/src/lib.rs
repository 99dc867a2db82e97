//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three things to poke at: the level curve of the default table, the
//! daily-task calendar for a profile, and a playground that feeds simulated
//! sessions through the engine and reports what was earned.
//!
//! Values cross the boundary as JSON strings.

use chrono::NaiveDate;
use gipgut_core::daily::select_daily_task;
use gipgut_core::engine::ingest_report;
use gipgut_core::simulate::{simulate_report, SimulationSpec};
use gipgut_core::{
    level_for_xp, select_locator, validate_report, Catalog, EngineState, IngestOutcome,
    LocatorStrategy, Profile,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn catalog() -> Catalog {
    Catalog::default_catalog()
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    s.parse().map_err(|_| format!("not a date: {s:?}"))
}

/// Cumulative XP needed for levels 1..=10.
#[wasm_bindgen]
pub fn level_thresholds() -> Vec<u32> {
    catalog()
        .level_table
        .cumulative_xp
        .iter()
        .map(|&x| x as u32)
        .collect()
}

/// Level at `samples` evenly spaced XP values over `0..=max_xp`.
#[wasm_bindgen]
pub fn level_curve(max_xp: u32, samples: u32) -> Vec<u8> {
    let table = catalog().level_table;
    let samples = samples.max(2);
    (0..samples)
        .map(|i| {
            level_for_xp(
                u64::from(max_xp) * u64::from(i) / u64::from(samples - 1),
                &table,
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CalendarDay {
    pub date: NaiveDate,
    pub achievement_id: String,
    pub name: String,
    pub threshold: u64,
    pub counter: String,
    pub xp_reward: u64,
}

pub fn calendar(start: NaiveDate, days: u32, profile_id: &str) -> Vec<CalendarDay> {
    let catalog = catalog();
    start
        .iter_days()
        .take(days as usize)
        .filter_map(|date| select_daily_task(date, profile_id, &catalog.achievements).ok())
        .map(|task| {
            let def = catalog
                .achievement(&task.achievement_id)
                .expect("task from catalog");
            CalendarDay {
                date: task.date,
                name: def.name.clone(),
                counter: def.counter.to_string(),
                achievement_id: task.achievement_id,
                threshold: task.threshold,
                xp_reward: task.xp_reward,
            }
        })
        .collect()
}

/// Daily tasks for `days` consecutive dates from `start` (YYYY-MM-DD).
#[wasm_bindgen]
pub fn daily_calendar(start: &str, days: u32, profile_id: &str) -> Result<String, JsError> {
    let start = parse_date(start).map_err(|e| JsError::new(&e))?;
    Ok(serde_json::to_string(&calendar(
        start,
        days.min(366),
        profile_id,
    ))?)
}

pub fn locator_label(id: &str, name: &str, xpath: &str) -> Result<String, String> {
    let locator = select_locator(Some(id), Some(name), Some(xpath)).map_err(|e| e.to_string())?;
    let strategy = match locator.strategy() {
        LocatorStrategy::Id => "id",
        LocatorStrategy::Name => "name",
        LocatorStrategy::Xpath => "xpath",
    };
    Ok(format!("{strategy}={}", locator.value()))
}

/// The locator an interaction would record, as `"strategy=value"`.
#[wasm_bindgen]
pub fn pick_locator(id: &str, name: &str, xpath: &str) -> Result<String, JsError> {
    locator_label(id, name, xpath).map_err(|e| JsError::new(&e))
}

#[derive(Debug, Serialize)]
pub struct Step {
    pub events: usize,
    pub outcome: IngestOutcome,
    pub profile: Profile,
}

/// An in-memory profile fed by simulated sessions.
#[wasm_bindgen]
pub struct Playground {
    catalog: Catalog,
    state: EngineState,
    sessions: u64,
}

impl Default for Playground {
    fn default() -> Self {
        let catalog = catalog();
        let state = EngineState::fresh(&catalog, "tester");
        Self {
            catalog,
            state,
            sessions: 0,
        }
    }
}

impl Playground {
    pub fn step(
        &mut self,
        pages: u32,
        clicks: u32,
        inputs: u32,
        tests: u32,
        failures: u32,
        today: &str,
    ) -> Result<Step, String> {
        let spec = SimulationSpec {
            pages: pages as usize,
            clicks: clicks as usize,
            inputs: inputs as usize,
            lookups: clicks as usize,
            tests: tests as usize,
            failures: failures as usize,
            seed: self.sessions,
            ..SimulationSpec::default()
        };
        let report = simulate_report(&spec).map_err(|e| e.to_string())?;
        let report = validate_report(report).map_err(|e| e.to_string())?;
        let today = parse_date(today)?;
        let (next, outcome) = ingest_report(&self.state, &self.catalog, &report, Some(today))
            .map_err(|e| e.to_string())?;
        self.state = next;
        self.sessions += 1;
        Ok(Step {
            events: report.events.len(),
            outcome,
            profile: self.state.profile.clone(),
        })
    }
}

#[wasm_bindgen]
impl Playground {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Self {
        Self::default()
    }

    /// Simulates one session and ingests it. Returns the step as JSON.
    pub fn run(
        &mut self,
        pages: u32,
        clicks: u32,
        inputs: u32,
        tests: u32,
        failures: u32,
        today: &str,
    ) -> Result<String, JsError> {
        let step = self
            .step(pages, clicks, inputs, tests, failures, today)
            .map_err(|e| JsError::new(&e))?;
        Ok(serde_json::to_string(&step)?)
    }

    pub fn profile(&self) -> Result<String, JsError> {
        Ok(serde_json::to_string(&self.state.profile)?)
    }

    /// Every progress row and the daily task, as JSON.
    pub fn progress(&self) -> Result<String, JsError> {
        let rows: Vec<_> = self.state.progress.iter().collect();
        Ok(serde_json::to_string(
            &serde_json::json!({ "rows": rows, "daily": self.state.daily }),
        )?)
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}
