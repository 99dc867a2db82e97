//! Milestones, XP and levels.

use crate::catalog::{LevelTable, UnlockCatalog, MAX_LEVEL};
use crate::model::{AchievementDef, AchievementProgress, Profile};

/// Largest level whose cumulative threshold is at or below `xp`.
pub fn level_for_xp(xp: u64, table: &LevelTable) -> u8 {
    let held = table.cumulative_xp.iter().take_while(|&&t| t <= xp).count();
    held.clamp(1, MAX_LEVEL as usize) as u8
}

/// Adds `delta` to the counter and returns the indices of milestones
/// crossed on the way. Counters keep growing past the last milestone.
pub fn apply_progress(progress: &mut AchievementProgress, delta: u64, def: &AchievementDef) -> Vec<usize> {
    let before = progress.counter;
    let after = before.saturating_add(delta);
    let crossed: Vec<usize> = def
        .milestones
        .iter()
        .enumerate()
        .filter(|&(_, &m)| before < m && m <= after)
        .map(|(i, _)| i)
        .collect();
    progress.counter = after;
    progress.milestones_reached += crossed.len() as u32;
    crossed
}

/// Adds XP and returns every level newly attained, in order.
/// XP is uncapped; the level stops at 10.
pub fn award_xp(profile: &mut Profile, xp: u64, table: &LevelTable) -> Vec<u8> {
    let before = profile.level;
    profile.xp = profile.xp.saturating_add(xp);
    let after = level_for_xp(profile.xp, table).max(before);
    profile.level = after;
    (before + 1..=after).collect()
}

/// Icons and titles listed for levels in `(old_level, new_level]`.
pub fn resolve_unlocks(old_level: u8, new_level: u8, catalog: &UnlockCatalog) -> (Vec<String>, Vec<String>) {
    if new_level <= old_level {
        return (Vec::new(), Vec::new());
    }
    let pick = |table: &std::collections::BTreeMap<u8, Vec<String>>| {
        table
            .range(old_level + 1..=new_level)
            .flat_map(|(_, ids)| ids.iter().cloned())
            .collect::<Vec<_>>()
    };
    (pick(&catalog.icons), pick(&catalog.titles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use crate::model::{CoreDrive, CounterKind, Scope};
    use crate::state::EngineState;
    use proptest::prelude::*;

    fn clicker() -> AchievementDef {
        Catalog::default_catalog().achievement("clicker").unwrap().clone()
    }

    /// Linear scan oracle: indices i with old < m_i <= new.
    fn crossed_oracle(milestones: &[u64], old: u64, new: u64) -> Vec<usize> {
        let mut out = Vec::new();
        for i in 0..milestones.len() {
            if old < milestones[i] && milestones[i] <= new {
                out.push(i);
            }
        }
        out
    }

    fn at(counter: u64, def: &AchievementDef) -> AchievementProgress {
        AchievementProgress {
            achievement_id: def.id.clone(),
            scope_key: "P".into(),
            counter,
            milestones_reached: def.milestones_reached_at(counter),
        }
    }

    #[test]
    fn apply_progress_examples() {
        let def = clicker();
        let cases = [(9, 1, vec![0]), (0, 250, vec![0, 1, 2]), (500, 7, vec![])];
        for (start, delta, want) in cases {
            assert_eq!(crossed_oracle(&def.milestones, start, start + delta), want);
            let mut p = at(start, &def);
            assert_eq!(apply_progress(&mut p, delta, &def), want);
            assert_eq!(p.counter, start + delta);
            assert_eq!(p.milestones_reached, def.milestones_reached_at(p.counter));
        }
    }

    #[test]
    fn level_for_xp_examples() {
        let t = LevelTable::default();
        assert_eq!(level_for_xp(0, &t), 1);
        assert_eq!(level_for_xp(299, &t), 2);
        assert_eq!(level_for_xp(300, &t), 3);
        assert_eq!(level_for_xp(4499, &t), 9);
        assert_eq!(level_for_xp(4500, &t), 10);
        assert_eq!(level_for_xp(1_000_000_000, &t), 10);
    }

    fn profile_at(level: u8, xp: u64) -> Profile {
        let mut p = EngineState::fresh(&Catalog::default_catalog(), "t").profile;
        p.level = level;
        p.xp = xp;
        p
    }

    #[test]
    fn award_xp_examples() {
        let t = LevelTable::default();
        let mut p = profile_at(1, 0);
        assert!(award_xp(&mut p, 0, &t).is_empty());
        assert_eq!((p.level, p.xp), (1, 0));

        let mut p = profile_at(1, 90);
        assert_eq!(award_xp(&mut p, 25, &t), [2]);
        assert_eq!((p.level, p.xp), (2, 115));

        let mut p = profile_at(9, 4499);
        assert_eq!(award_xp(&mut p, 10_000, &t), [10]);
        assert_eq!((p.level, p.xp), (10, 14_499));
    }

    #[test]
    fn resolve_unlocks_examples() {
        let u = Catalog::default_catalog().unlock_catalog;
        assert_eq!(resolve_unlocks(3, 3, &u), (vec![], vec![]));
        let (icons, titles) = resolve_unlocks(1, 3, &u);
        let mut want_icons = u.icons[&2].clone();
        want_icons.extend(u.icons[&3].clone());
        let mut want_titles = u.titles[&2].clone();
        want_titles.extend(u.titles[&3].clone());
        assert_eq!((icons, titles), (want_icons, want_titles));
        assert_eq!(
            resolve_unlocks(9, 10, &u),
            (vec!["icon-golden-crown".to_string()], vec!["title-gui-legend".to_string()])
        );
    }

    proptest! {
        #[test]
        fn apply_progress_matches_oracle(
            mut ms in proptest::collection::btree_set(1u64..500, 1..=5),
            start in 0u64..600,
            delta in 1u64..600,
        ) {
            let milestones: Vec<u64> = std::mem::take(&mut ms).into_iter().collect();
            let def = AchievementDef {
                id: "a".into(), name: "A".into(), description: String::new(), icon_ref: String::new(),
                scope: Scope::Global, counter: CounterKind::Clicks,
                xp_per_milestone: vec![1; milestones.len()], milestones,
                daily_threshold: None, core_drive: CoreDrive::Accomplishment,
            };
            let mut p = at(start, &def);
            let got = apply_progress(&mut p, delta, &def);
            prop_assert_eq!(got, crossed_oracle(&def.milestones, start, start + delta));
            prop_assert_eq!(p.milestones_reached, def.milestones_reached_at(p.counter));
        }

        #[test]
        fn level_is_monotone(a in 0u64..10_000, b in 0u64..10_000) {
            let t = LevelTable::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(level_for_xp(lo, &t) <= level_for_xp(hi, &t));
        }
    }
}
