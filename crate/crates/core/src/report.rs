//! Session report validation and raw counter extraction.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use url::{Host, Url};

use crate::model::{CounterKind, EventKind, SessionReport, TestEvent};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid report: {field}, {reason}")]
pub struct ReportError {
    pub field: String,
    pub reason: String,
}

impl ReportError {
    fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self { field: field.into(), reason: reason.into() }
    }
}

/// Checks every report invariant and returns the report with events
/// stably sorted by timestamp. The first violation found is reported;
/// nothing is repaired except ordering.
pub fn validate_report(mut report: SessionReport) -> Result<SessionReport, ReportError> {
    if uuid::Uuid::parse_str(&report.session_id).is_err() {
        return Err(ReportError::new("session_id", "not a UUID"));
    }
    if report.project_id.is_empty() {
        return Err(ReportError::new("project_id", "must be non-empty"));
    }
    if report.profile_id.is_empty() {
        return Err(ReportError::new("profile_id", "must be non-empty"));
    }
    if report.started_at > report.finished_at {
        return Err(ReportError::new("started_at", "later than finished_at"));
    }

    let mut seen = HashSet::with_capacity(report.results.len());
    for (i, result) in report.results.iter().enumerate() {
        if result.test_id.is_empty() {
            return Err(ReportError::new(format!("results[{i}].test_id"), "must be non-empty"));
        }
        if !seen.insert(result.test_id.as_str()) {
            return Err(ReportError::new(
                format!("results[{i}].test_id"),
                format!("duplicate result for {:?}", result.test_id),
            ));
        }
    }

    for (i, event) in report.events.iter().enumerate() {
        check_event(i, event, &seen)?;
    }

    report.events.sort_by_key(|e| e.timestamp);
    Ok(report)
}

fn check_event(i: usize, event: &TestEvent, known_tests: &HashSet<&str>) -> Result<(), ReportError> {
    match &event.url {
        Some(url) => {
            if Url::parse(url).is_err() {
                return Err(ReportError::new(format!("events[{i}].url"), "not an absolute URL"));
            }
        }
        None if event.kind.requires_url() => {
            return Err(ReportError::new(format!("events[{i}].url"), "required for this kind"));
        }
        None => {}
    }
    if event.locator.is_none() && event.kind.requires_locator() {
        return Err(ReportError::new(format!("events[{i}].locator"), "required for this kind"));
    }
    if !event.test_id.is_empty() && !known_tests.contains(event.test_id.as_str()) {
        return Err(ReportError::new(
            format!("events[{i}].test_id"),
            format!("{:?} has no result", event.test_id),
        ));
    }
    Ok(())
}

/// Registrable part of a URL host: the last two labels, or three when the
/// second-level label is a common country-code registry (`co.uk`,
/// `com.au`, ...). IP addresses and single-label hosts are kept whole.
pub fn registrable_host(url: &str) -> Option<String> {
    let parsed = Url::parse(url).ok()?;
    let host = match parsed.host()? {
        Host::Domain(d) => d.trim_end_matches('.').to_ascii_lowercase(),
        Host::Ipv4(ip) => return Some(ip.to_string()),
        Host::Ipv6(ip) => return Some(ip.to_string()),
    };
    let labels: Vec<&str> = host.split('.').filter(|l| !l.is_empty()).collect();
    let keep = match labels.as_slice() {
        [] => return None,
        [.., second, tld]
            if labels.len() >= 3
                && tld.len() == 2
                && matches!(*second, "co" | "com" | "org" | "net" | "gov" | "ac" | "edu") =>
        {
            3
        }
        _ => 2,
    };
    let start = labels.len().saturating_sub(keep);
    Some(labels[start..].join("."))
}

fn visited_urls(report: &SessionReport) -> impl Iterator<Item = &str> {
    report
        .events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::Navigate | EventKind::PageLoad))
        .filter_map(|e| e.url.as_deref())
}

fn count_kind(report: &SessionReport, kind: EventKind) -> u64 {
    report.events.iter().filter(|e| e.kind == kind).count() as u64
}

/// Raw counter value contributed by one report.
///
/// `tests_fixed` and `profile_customizations` are always 0 here: they come
/// from the pass/fail history and from profile edits respectively.
pub fn count_events(report: &SessionReport, counter: CounterKind) -> u64 {
    match counter {
        CounterKind::PagesVisited => visited_urls(report).collect::<BTreeSet<_>>().len() as u64,
        CounterKind::SitesVisited => {
            visited_urls(report).filter_map(registrable_host).collect::<BTreeSet<_>>().len() as u64
        }
        CounterKind::Clicks => count_kind(report, EventKind::Click),
        CounterKind::Inputs => count_kind(report, EventKind::SendKeys),
        CounterKind::ElementLookups => count_kind(report, EventKind::FindElement),
        CounterKind::ElementInteractions => {
            count_kind(report, EventKind::Click) + count_kind(report, EventKind::SendKeys)
        }
        CounterKind::TestsRun => report.results.iter().filter(|r| r.status.ran()).count() as u64,
        CounterKind::SessionsCompleted => 1,
        CounterKind::TestsFixed | CounterKind::ProfileCustomizations => 0,
    }
}

/// `count_events` for every counter kind.
pub fn count_all(report: &SessionReport) -> BTreeMap<CounterKind, u64> {
    CounterKind::ALL.iter().map(|&k| (k, count_events(report, k))).collect()
}
