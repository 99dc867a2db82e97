//! Source of the engine's current calendar date.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Clock {
    /// Today's UTC date from the system clock.
    #[default]
    System,
    /// A pinned date, for tests and replays of a specific day.
    Fixed(NaiveDate),
}

impl Clock {
    pub fn today(&self) -> Option<NaiveDate> {
        match self {
            Clock::System => Some(chrono::Utc::now().date_naive()),
            Clock::Fixed(date) => Some(*date),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid clock {0:?}: expected `system`, `fixed:YYYY-MM-DD` or `YYYY-MM-DD`")]
pub struct ClockParseError(String);

impl FromStr for Clock {
    type Err = ClockParseError;

    /// Accepts `system`, `fixed:2024-01-01`, `fixed(2024-01-01)` or a bare date.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("system") {
            return Ok(Clock::System);
        }
        let date = s
            .strip_prefix("fixed:")
            .or_else(|| s.strip_prefix("fixed(").and_then(|r| r.strip_suffix(')')))
            .unwrap_or(s);
        date.parse().map(Clock::Fixed).map_err(|_| ClockParseError(s.to_owned()))
    }
}

impl fmt::Display for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clock::System => f.write_str("system"),
            Clock::Fixed(d) => write!(f, "fixed:{d}"),
        }
    }
}
