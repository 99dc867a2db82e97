//! Deterministic daily task selection.

use chrono::NaiveDate;
use sha2::{Digest, Sha256};

use crate::model::{AchievementDef, DailyTask, Scope};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no daily candidates")]
pub struct NoDailyCandidates;

/// Global achievements carrying a daily threshold, ordered by id.
pub fn daily_candidates(defs: &[AchievementDef]) -> Vec<&AchievementDef> {
    let mut eligible: Vec<_> = defs
        .iter()
        .filter(|d| d.scope == Scope::Global && d.daily_threshold.is_some())
        .collect();
    eligible.sort_by(|a, b| a.id.cmp(&b.id));
    eligible
}

/// Seed for a day: the first eight bytes, big-endian, of
/// `SHA-256("<YYYY-MM-DD>/<profile_id>")`.
pub fn daily_seed(date: NaiveDate, profile_id: &str) -> u64 {
    let digest = Sha256::digest(format!("{}/{}", date.format("%Y-%m-%d"), profile_id).as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(head)
}

pub fn select_daily_task(
    date: NaiveDate,
    profile_id: &str,
    defs: &[AchievementDef],
) -> Result<DailyTask, NoDailyCandidates> {
    let eligible = daily_candidates(defs);
    if eligible.is_empty() {
        return Err(NoDailyCandidates);
    }
    let index = (daily_seed(date, profile_id) % eligible.len() as u64) as usize;
    let def = eligible[index];
    Ok(DailyTask {
        date,
        achievement_id: def.id.clone(),
        threshold: def.daily_threshold.expect("filtered on daily_threshold"),
        counter: 0,
        completed: false,
        xp_reward: def.xp_per_milestone[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;

    fn date(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    // Expected values computed with Python's hashlib over "<date>/tester".
    #[test]
    fn seed_matches_reference_digests() {
        assert_eq!(daily_seed(date("2024-01-01"), "tester"), 0xdc46992196e4cf33);
        assert_eq!(daily_seed(date("2024-01-02"), "tester"), 0x178b64619650043f);
        assert_eq!(daily_seed(date("2024-03-15"), "tester"), 0x4b7378362d116700);
    }

    #[test]
    fn default_catalog_selections() {
        let defs = Catalog::default_catalog().achievements;
        let pick = |d: &str| select_daily_task(date(d), "tester", &defs).unwrap();
        assert_eq!(pick("2024-01-01").achievement_id, "marathoner");
        assert_eq!(pick("2024-01-02").achievement_id, "globetrotter");
        let task = pick("2024-03-15");
        assert_eq!(task.achievement_id, "voyager");
        assert_eq!((task.threshold, task.xp_reward, task.counter, task.completed), (2, 25, 0, false));
        assert_eq!(pick("2024-03-15"), task);
    }

    #[test]
    fn singleton_catalog_always_wins() {
        let defs: Vec<_> = Catalog::default_catalog()
            .achievements
            .into_iter()
            .filter(|d| d.id == "bug-squasher" || d.daily_threshold.is_none())
            .collect();
        for day in 0..30 {
            let d = date("2024-05-01") + chrono::Days::new(day);
            assert_eq!(select_daily_task(d, "x", &defs).unwrap().achievement_id, "bug-squasher");
        }
    }

    #[test]
    fn no_candidates_is_an_error() {
        let defs: Vec<_> = Catalog::default_catalog()
            .achievements
            .into_iter()
            .filter(|d| d.daily_threshold.is_none())
            .collect();
        let err = select_daily_task(date("2024-01-01"), "x", &defs).unwrap_err();
        assert_eq!(err.to_string(), "no daily candidates");
    }
}
