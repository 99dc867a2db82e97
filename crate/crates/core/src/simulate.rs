//! Synthetic session reports for demos and tests.
//!
//! URLs and locators come from a small fixed vocabulary so that replays
//! exercise the distinct-page and distinct-site logic.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    select_locator, EventKind, Millis, SessionReport, TestEvent, TestResult, TestStatus,
};

const HOSTS: [&str; 4] = ["shop.example.com", "blog.example.org", "docs.example.net", "www.example.io"];
const PATHS: [&str; 8] = ["/", "/cart", "/search", "/product/1", "/login", "/checkout", "/account", "/help"];

/// (id, name, xpath) attribute triples as a WebDriver element would report them.
const ELEMENTS: [(&str, &str, &str); 6] = [
    ("search", "q", "/html/body/header/form/input"),
    ("", "email", "/html/body/main/form/input[1]"),
    ("", "", "/html/body/main/div[2]/button"),
    ("add-to-cart", "", "/html/body/main/section/button[1]"),
    ("", "password", "/html/body/main/form/input[2]"),
    ("", "", "(//a[@class='nav'])[3]"),
];

/// Base timestamp of simulated sessions: 2024-01-01T00:00:00Z.
const BASE_MILLIS: Millis = 1_704_067_200_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationSpec {
    pub pages: usize,
    pub clicks: usize,
    pub inputs: usize,
    pub lookups: usize,
    pub tests: usize,
    pub failures: usize,
    pub seed: u64,
    pub project_id: String,
    pub profile_id: String,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self {
            pages: 0,
            clicks: 0,
            inputs: 0,
            lookups: 0,
            tests: 0,
            failures: 0,
            seed: 0,
            project_id: "demo-shop".into(),
            profile_id: "tester".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot fail {failures} of {tests} tests")]
pub struct SimulationError {
    pub failures: usize,
    pub tests: usize,
}

/// The `i`-th distinct page URL; the first 32 cover the vocabulary, later
/// ones add a query string.
fn page_url(order: &[usize], i: usize) -> String {
    let slot = order[i % order.len()];
    let base = format!("https://{}{}", HOSTS[slot / PATHS.len()], PATHS[slot % PATHS.len()]);
    if i < order.len() {
        base
    } else {
        format!("{base}?page={i}")
    }
}

/// Builds a report whose raw counters equal the requested counts:
/// `pages` distinct URLs, `clicks` clicks, `inputs` send-keys, `lookups`
/// find-element calls and `tests` results of which `failures` failed.
/// The same spec always produces the same report.
pub fn simulate_report(spec: &SimulationSpec) -> Result<SessionReport, SimulationError> {
    if spec.failures > spec.tests {
        return Err(SimulationError { failures: spec.failures, tests: spec.tests });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut id_bytes = [0u8; 16];
    rng.fill_bytes(&mut id_bytes);
    let session_id = uuid::Builder::from_random_bytes(id_bytes).into_uuid().to_string();

    let mut order: Vec<usize> = (0..HOSTS.len() * PATHS.len()).collect();
    order.shuffle(&mut rng);

    // interleave the actions, then hand them out to tests in contiguous runs
    let mut actions: Vec<EventKind> = std::iter::repeat_n(EventKind::Navigate, spec.pages)
        .chain(std::iter::repeat_n(EventKind::Click, spec.clicks))
        .chain(std::iter::repeat_n(EventKind::SendKeys, spec.inputs))
        .chain(std::iter::repeat_n(EventKind::FindElement, spec.lookups))
        .collect();
    actions.shuffle(&mut rng);

    let test_ids: Vec<String> = (0..spec.tests).map(|i| format!("simulated::test_{i:03}")).collect();
    let mut failing: Vec<usize> = (0..spec.tests).collect();
    failing.shuffle(&mut rng);
    failing.truncate(spec.failures);

    let started_at = BASE_MILLIS + rng.random_range(0..86_400_000);
    let mut now = started_at;
    let mut tick = |rng: &mut ChaCha8Rng| {
        now += rng.random_range(20..400);
        now
    };
    let mut events = Vec::with_capacity(actions.len() + 2 * spec.tests);
    let mut pages_emitted = 0;
    let per_test = if spec.tests == 0 { actions.len() } else { actions.len().div_ceil(spec.tests) };
    let mut chunks = actions.chunks(per_test.max(1));

    let groups = spec.tests.max(1);
    for group in 0..groups {
        let test_id = test_ids.get(group).cloned().unwrap_or_default();
        if !test_id.is_empty() {
            events.push(bare(EventKind::TestStart, tick(&mut rng), &test_id));
        }
        for &kind in chunks.next().unwrap_or(&[]) {
            let mut event = bare(kind, tick(&mut rng), &test_id);
            match kind {
                EventKind::Navigate => {
                    event.url = Some(page_url(&order, pages_emitted));
                    pages_emitted += 1;
                }
                _ => {
                    let (id, name, xpath) = ELEMENTS[rng.random_range(0..ELEMENTS.len())];
                    event.locator = Some(select_locator(Some(id), Some(name), Some(xpath)).expect("xpath present"));
                    if kind == EventKind::SendKeys {
                        event.detail = Some("typed".into());
                    }
                }
            }
            events.push(event);
        }
        if !test_id.is_empty() {
            events.push(bare(EventKind::TestEnd, tick(&mut rng), &test_id));
        }
    }
    let finished_at = tick(&mut rng);

    let results = test_ids
        .into_iter()
        .enumerate()
        .map(|(i, test_id)| TestResult {
            test_id,
            status: if failing.contains(&i) { TestStatus::Failed } else { TestStatus::Passed },
        })
        .collect();

    Ok(SessionReport {
        session_id,
        project_id: spec.project_id.clone(),
        profile_id: spec.profile_id.clone(),
        started_at,
        finished_at,
        events,
        results,
    })
}

fn bare(kind: EventKind, timestamp: Millis, test_id: &str) -> TestEvent {
    TestEvent { kind, timestamp, test_id: test_id.to_owned(), url: None, locator: None, detail: None }
}
