//! Human-readable output for the CLI.

use std::fmt::Write;

use gipgut_core::service::AchievementView;
use gipgut_core::{Catalog, DailyTask, IngestOutcome, Profile};

fn name_of<'a>(catalog: &'a Catalog, id: &'a str) -> &'a str {
    catalog.achievement(id).map_or(id, |d| d.name.as_str())
}

pub fn outcome(out: &IngestOutcome, catalog: &Catalog) -> String {
    let mut s = String::new();
    if out.duplicate {
        s.push_str("duplicate session — no effect\n");
        return s;
    }
    for m in &out.milestones_crossed {
        let _ = writeln!(
            s,
            "{} ✓ milestone {} (+{} XP)",
            name_of(catalog, &m.achievement_id),
            m.milestone_index + 1,
            m.xp_awarded
        );
    }
    if let Some(d) = &out.daily_progress {
        if d.completed_now {
            let _ = writeln!(s, "Daily task ✓ completed (+{} XP)", d.xp_awarded);
        }
    }
    for t in &out.fixed_tests {
        let _ = writeln!(s, "fixed: {t}");
    }
    if out.level_after > out.level_before {
        let _ = writeln!(s, "Level up! {} → {}", out.level_before, out.level_after);
    }
    for icon in &out.newly_unlocked_icons {
        let _ = writeln!(s, "unlocked icon {icon}");
    }
    for title in &out.newly_unlocked_titles {
        let _ = writeln!(s, "unlocked title {title}");
    }
    if s.is_empty() {
        s.push_str("no milestones crossed\n");
    }
    s
}

pub fn level_line(profile: &Profile, catalog: &Catalog) -> String {
    match catalog.level_table.next_threshold(profile.level) {
        Some(next) => format!("Level {} — {}/{} XP", profile.level, profile.xp, next),
        None => format!("Level {} — {} XP (max level)", profile.level, profile.xp),
    }
}

pub fn profile(profile: &Profile, catalog: &Catalog) -> String {
    let mut s = format!("{} ({})\n{}\n", profile.username, profile.profile_id, level_line(profile, catalog));
    let _ = writeln!(s, "icon: {}  title: {}", profile.icon_id, profile.title_id);
    if !profile.showcase.is_empty() {
        let _ = writeln!(s, "showcase: {}", profile.showcase.join(", "));
    }
    s
}

pub fn achievements(views: &[AchievementView]) -> String {
    let mut s = String::new();
    for v in views {
        let row = v.global_progress.as_ref().or(v.project_progress.as_ref());
        let (counter, reached) = row.map_or((0, 0), |p| (p.counter, p.milestones_reached as usize));
        let progress = match v.def.milestones.get(reached) {
            Some(next) => format!("{counter}/{next}"),
            None => format!("{counter} (complete)"),
        };
        let scope = match (&v.global_progress, &v.project_progress) {
            (Some(_), _) => "global".to_owned(),
            (None, Some(p)) => p.scope_key.clone(),
            (None, None) => "project".to_owned(),
        };
        let _ = writeln!(
            s,
            "{:<14} {:<10} {:<16} {}/{} milestones",
            v.def.name,
            scope,
            progress,
            reached,
            v.def.milestones.len()
        );
    }
    s
}

pub fn daily(task: &DailyTask, catalog: &Catalog) -> String {
    let counter = catalog.achievement(&task.achievement_id).map(|d| d.counter.as_str()).unwrap_or("counter");
    let status = if task.completed { "✓ completed".to_owned() } else { format!("{}/{}", task.counter, task.threshold) };
    format!(
        "{}: {} ({} {}) {} (+{} XP)\n",
        task.date,
        name_of(catalog, &task.achievement_id),
        task.threshold,
        counter,
        status,
        task.xp_reward
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use gipgut_core::state::EngineState;

    #[test]
    fn fresh_profile_level_line() {
        let catalog = Catalog::default_catalog();
        let state = EngineState::fresh(&catalog, "tester");
        assert_eq!(level_line(&state.profile, &catalog), "Level 1 — 0/100 XP");
    }

    #[test]
    fn duplicate_outcome() {
        let mut out = IngestOutcome::empty(Some("s".into()), 1);
        out.duplicate = true;
        assert_eq!(outcome(&out, &Catalog::default_catalog()), "duplicate session — no effect\n");
    }
}
