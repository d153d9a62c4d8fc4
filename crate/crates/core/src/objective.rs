//! The three normalized penalty terms and their weighted total.
//!
//! Every term is computed from integer aggregates (site indicators, shortfall
//! minutes, preference hits) collected in a [`Tally`]. Incremental search
//! states keep the same aggregates, so a solver's energy and
//! [`total_objective`] agree bit for bit.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{CollabIdx, Instance, PreferenceDenominator, SiteIdx, Slot};

/// One `x = 1` entry: collaborator `collaborator` works `slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub collaborator: CollabIdx,
    pub slot: Slot,
}

impl Assignment {
    pub const fn new(collaborator: CollabIdx, slot: Slot) -> Self {
        Self { collaborator, slot }
    }
}

/// A weekly roster. Site indicators and break indicators are derived from
/// the assignments and never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schedule {
    assignments: BTreeSet<Assignment>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: Assignment) -> bool {
        self.assignments.insert(a)
    }

    pub fn remove(&mut self, a: &Assignment) -> bool {
        self.assignments.remove(a)
    }

    pub fn contains(&self, a: &Assignment) -> bool {
        self.assignments.contains(a)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Assignment> + '_ {
        self.assignments.iter()
    }

    /// Assignments of one collaborator, ordered by slot.
    pub fn of(&self, c: CollabIdx) -> impl Iterator<Item = &Assignment> + '_ {
        let lo = Assignment::new(c, Slot::new(0, 0, 0));
        self.assignments
            .range(lo..)
            .take_while(move |a| a.collaborator == c)
    }
}

impl FromIterator<Assignment> for Schedule {
    fn from_iter<I: IntoIterator<Item = Assignment>>(iter: I) -> Self {
        Self {
            assignments: iter.into_iter().collect(),
        }
    }
}

impl Extend<Assignment> for Schedule {
    fn extend<I: IntoIterator<Item = Assignment>>(&mut self, iter: I) {
        self.assignments.extend(iter);
    }
}

impl<'a> IntoIterator for &'a Schedule {
    type Item = &'a Assignment;
    type IntoIter = alloc::collections::btree_set::Iter<'a, Assignment>;

    fn into_iter(self) -> Self::IntoIter {
        self.assignments.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub multi_site: f64,
    pub hours_deviation: f64,
    pub preference: f64,
    pub total: f64,
    pub weights: [f64; 3],
}

/// Integer aggregates from which the objective is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    /// Σ over collaborators of the number of distinct sites worked.
    pub sites_used: u64,
    /// Σ over collaborators of (weekly target − paid weekly minutes).
    pub shortfall_minutes: i64,
    /// Assignments outside the collaborator's effective preferred sites.
    pub preference_hits: u64,
}

/// The three normalizers, precomputed once per instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Denominators {
    pub multi_site: f64,
    pub hours: f64,
    pub preference: f64,
}

impl Denominators {
    pub fn of(inst: &Instance) -> Self {
        let c = inst.n_collaborators() as f64;
        let s = inst.n_sites() as f64;
        let dj = (inst.n_days() * inst.n_shifts()) as f64;
        let hours: u64 = (0..inst.n_collaborators())
            .map(|c| u64::from(inst.weekly_cap(c)))
            .sum();
        let preference = match inst.interpretation.preference_denominator {
            PreferenceDenominator::CollabSiteDayShift => c * s * dj,
            PreferenceDenominator::CollabDayShift => c * dj,
        };
        Self {
            multi_site: c * s,
            hours: hours as f64,
            preference,
        }
    }
}

/// Sum of weekly targets over all collaborators, in minutes.
pub fn total_target_minutes(inst: &Instance) -> i64 {
    (0..inst.n_collaborators())
        .map(|c| i64::from(inst.weekly_cap(c)))
        .sum()
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Converts aggregates into the normalized breakdown.
pub fn breakdown_from_tally(inst: &Instance, den: &Denominators, t: &Tally) -> ObjectiveBreakdown {
    let w = inst.effective_weights().0;
    let multi_site = ratio(t.sites_used as f64, den.multi_site);
    let hours_deviation = ratio(t.shortfall_minutes as f64, den.hours);
    let preference = ratio(t.preference_hits as f64, den.preference);
    let total = w[0] * multi_site + w[1] * hours_deviation + w[2] * preference;
    ObjectiveBreakdown {
        multi_site,
        hours_deviation,
        preference,
        total,
        weights: w,
    }
}

/// Site indicator: 1 iff `c` works at `s` at least once.
pub fn derived_y(sch: &Schedule, c: CollabIdx, s: SiteIdx) -> u8 {
    u8::from(sch.of(c).any(|a| a.slot.site == s))
}

/// Break indicator: 1 iff `c` works a shift longer than the break threshold on day `d`.
pub fn derived_b(sch: &Schedule, inst: &Instance, c: CollabIdx, d: usize) -> u8 {
    u8::from(sch.of(c).any(|a| {
        a.slot.day == d
            && inst
                .duration(a.slot)
                .is_some_and(|q| inst.params.needs_break(q))
    }))
}

/// Paid minutes per day and for the whole week.
///
/// A day's minutes are the summed shift durations minus one break when the
/// break indicator is set.
pub fn worked_minutes(sch: &Schedule, inst: &Instance, c: CollabIdx) -> (Vec<u32>, u32) {
    let mut gross = vec![0u32; inst.n_days()];
    let mut long = vec![false; inst.n_days()];
    for a in sch.of(c) {
        if let Some(q) = inst.duration(a.slot) {
            gross[a.slot.day] += q;
            long[a.slot.day] |= inst.params.needs_break(q);
        }
    }
    let per_day: Vec<u32> = gross
        .iter()
        .zip(&long)
        .map(|(&g, &l)| {
            if l {
                g.saturating_sub(inst.params.break_minutes)
            } else {
                g
            }
        })
        .collect();
    let week = per_day.iter().sum();
    (per_day, week)
}

pub fn tally(sch: &Schedule, inst: &Instance) -> Tally {
    let mut t = Tally {
        shortfall_minutes: total_target_minutes(inst),
        ..Tally::default()
    };
    for c in 0..inst.n_collaborators() {
        let mut sites = BTreeSet::new();
        for a in sch.of(c) {
            sites.insert(a.slot.site);
            if inst.is_preference_violation(c, a.slot.site) {
                t.preference_hits += 1;
            }
        }
        t.sites_used += sites.len() as u64;
        t.shortfall_minutes -= i64::from(worked_minutes(sch, inst, c).1);
    }
    t
}

/// (Σ_c Σ_s y) / (|C|·|S|)
pub fn multi_site_penalty(sch: &Schedule, inst: &Instance) -> f64 {
    total_objective(sch, inst).multi_site
}

/// Σ_c (target_c − paid_c) / Σ_c target_c
pub fn hours_deviation_penalty(sch: &Schedule, inst: &Instance) -> f64 {
    total_objective(sch, inst).hours_deviation
}

/// Off-preference assignments over the configured denominator.
pub fn preference_penalty(sch: &Schedule, inst: &Instance) -> f64 {
    total_objective(sch, inst).preference
}

pub fn total_objective(sch: &Schedule, inst: &Instance) -> ObjectiveBreakdown {
    breakdown_from_tally(inst, &Denominators::of(inst), &tally(sch, inst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Collaborator, Contract, Gender, Level, PreferenceScope, Site, Weights};

    /// 2 sites, 2 collaborators (one FT, one PT), Mon..Fri, one shift.
    fn toy() -> Instance {
        let sites = vec![
            Site::new("k", "A", Level::Kindergarten),
            Site::new("p", "A", Level::Primary),
        ];
        let collabs = vec![
            Collaborator::new("ft", Gender::Female, Contract::FullTime),
            Collaborator::new("pt", Gender::Male, Contract::PartTime).preferring([1]),
        ];
        let mut inst = Instance::with_defaults(sites, collabs);
        inst.shifts.truncate(1);
        inst.timetable = crate::model::Timetable::empty(2, 5, 1);
        for d in 0..5 {
            inst.timetable.set(0, d, 0, Some("07:30-14:42".parse().unwrap()));
            inst.timetable.set(1, d, 0, Some("07:45-16:30".parse().unwrap()));
        }
        inst
    }

    #[test]
    fn derived_indicators() {
        let inst = toy();
        let mut sch = Schedule::new();
        sch.insert(Assignment::new(0, Slot::new(0, 0, 0)));
        assert_eq!(derived_y(&sch, 0, 0), 1);
        assert_eq!(derived_y(&sch, 0, 1), 0);
        sch.insert(Assignment::new(0, Slot::new(0, 1, 0)));
        assert_eq!(derived_y(&sch, 0, 0), 1);
        assert_eq!(derived_b(&sch, &inst, 0, 0), 0);
        sch.insert(Assignment::new(0, Slot::new(1, 2, 0)));
        assert_eq!(derived_b(&sch, &inst, 0, 2), 1);
        assert_eq!(derived_b(&sch, &inst, 0, 3), 0);
    }

    #[test]
    fn worked_minutes_subtracts_break() {
        let inst = toy();
        let sch: Schedule = [Assignment::new(0, Slot::new(1, 0, 0))].into_iter().collect();
        let (days, week) = worked_minutes(&sch, &inst, 0);
        assert_eq!(days[0], 495);
        assert_eq!(week, 495);
        let sch: Schedule = [Assignment::new(0, Slot::new(0, 0, 0))].into_iter().collect();
        assert_eq!(worked_minutes(&sch, &inst, 0).1, 432);
        let (days, week) = worked_minutes(&Schedule::new(), &inst, 0);
        assert_eq!(days, vec![0; 5]);
        assert_eq!(week, 0);
    }

    #[test]
    fn empty_schedule_breakdown() {
        let inst = toy();
        let b = total_objective(&Schedule::new(), &inst);
        assert_eq!(b.multi_site, 0.0);
        assert_eq!(b.hours_deviation, 1.0);
        assert_eq!(b.preference, 0.0);
        assert!((b.total - 0.3).abs() < 1e-15);
    }

    #[test]
    fn hours_at_cap_is_zero() {
        // 1080 is not a sum of these shifts; lower the part-time cap to 2 × 432.
        let mut inst2 = toy();
        inst2.params.h_pt_minutes = 864;
        let mut sch = Schedule::new();
        for d in 0..5 {
            sch.insert(Assignment::new(0, Slot::new(0, d, 0)));
        }
        sch.insert(Assignment::new(1, Slot::new(0, 0, 0)));
        sch.insert(Assignment::new(1, Slot::new(0, 1, 0)));
        assert_eq!(hours_deviation_penalty(&sch, &inst2), 0.0);
    }

    #[test]
    fn multi_site_and_preference_counts() {
        let inst = toy();
        let sch: Schedule = [
            Assignment::new(0, Slot::new(0, 0, 0)),
            Assignment::new(0, Slot::new(1, 1, 0)),
            Assignment::new(1, Slot::new(0, 2, 0)),
        ]
        .into_iter()
        .collect();
        let b = total_objective(&sch, &inst);
        assert!((b.multi_site - 3.0 / 4.0).abs() < 1e-15);
        // only the PT collaborator declared a preference (site 1); one hit
        assert!((b.preference - 1.0 / 20.0).abs() < 1e-15);
        let mut alt = inst.clone();
        alt.interpretation.preference_denominator = PreferenceDenominator::CollabDayShift;
        assert!((preference_penalty(&sch, &alt) - 1.0 / 10.0).abs() < 1e-15);
        let mut all = inst.clone();
        all.interpretation.preference_scope = PreferenceScope::PenalizeUndeclared;
        assert!((preference_penalty(&sch, &all) - 3.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn weight_scaling_is_invisible() {
        let inst = toy();
        let sch: Schedule = [Assignment::new(0, Slot::new(1, 0, 0))].into_iter().collect();
        let base = total_objective(&sch, &inst);
        let mut scaled = inst.clone();
        scaled.weights = Weights([5.0, 3.0, 2.0]);
        let b = total_objective(&sch, &scaled);
        assert!((b.total - base.total).abs() < 1e-15);
        assert_eq!(b.multi_site, base.multi_site);
    }

    #[test]
    fn raw_weights_skip_normalization() {
        let mut inst = toy();
        inst.weights = Weights([10.0, 7.0, 5.0]);
        inst.interpretation.raw_weights = true;
        let b = total_objective(&Schedule::new(), &inst);
        assert!((b.total - 7.0).abs() < 1e-12);
    }
}
