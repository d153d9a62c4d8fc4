//! Itemized hard-constraint verification.
//!
//! Site and break indicators are derived from the assignments, so the
//! linking rows between them and the assignments hold by construction and
//! have no check here.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::constraints::{ConstraintSet, Family, Scope};
use crate::model::{CollabIdx, Instance, SiteIdx, Slot};
use crate::objective::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    Coverage,
    OneShiftPerDay,
    KindergartenFemale,
    WeeklyLimit,
    CandidateDomain,
}

impl ViolationKind {
    pub const ALL: [ViolationKind; 5] = [
        ViolationKind::Coverage,
        ViolationKind::OneShiftPerDay,
        ViolationKind::KindergartenFemale,
        ViolationKind::WeeklyLimit,
        ViolationKind::CandidateDomain,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::Coverage => "Coverage",
            ViolationKind::OneShiftPerDay => "OneShiftPerDay",
            ViolationKind::KindergartenFemale => "KindergartenFemale",
            ViolationKind::WeeklyLimit => "WeeklyLimit",
            ViolationKind::CandidateDomain => "CandidateDomain",
        }
    }
}

impl From<Family> for ViolationKind {
    fn from(f: Family) -> Self {
        match f {
            Family::Coverage => ViolationKind::Coverage,
            Family::OneShiftPerDay => ViolationKind::OneShiftPerDay,
            Family::KindergartenFemale => ViolationKind::KindergartenFemale,
            Family::WeeklyLimit => ViolationKind::WeeklyLimit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Location {
    Slot(Slot),
    CollaboratorDay { collaborator: CollabIdx, day: usize },
    Site(SiteIdx),
    Collaborator(CollabIdx),
    Assignment { collaborator: CollabIdx, slot: Slot },
}

impl From<Scope> for Location {
    fn from(s: Scope) -> Self {
        match s {
            Scope::Slot(slot) => Location::Slot(slot),
            Scope::CollaboratorDay { collaborator, day } => {
                Location::CollaboratorDay { collaborator, day }
            }
            Scope::Site(site) => Location::Site(site),
            Scope::Collaborator(c) => Location::Collaborator(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: Location,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    /// Distinct kinds present, in [`ViolationKind::ALL`] order.
    pub fn kinds(&self) -> Vec<ViolationKind> {
        ViolationKind::ALL
            .into_iter()
            .filter(|k| self.count(*k) > 0)
            .collect()
    }
}

fn slot_label(inst: &Instance, slot: Slot) -> String {
    let site = inst.sites.get(slot.site).map_or("?", |s| s.id.as_str());
    let day = inst.days.get(slot.day).map_or("?", String::as_str);
    let shift = inst.shifts.get(slot.shift).map_or("?", String::as_str);
    format!("{site} {day} {shift}")
}

fn describe(inst: &Instance, family: Family, scope: Scope, lhs: i64, rhs: i64) -> String {
    match scope {
        Scope::Slot(slot) => format!("{} has no collaborator", slot_label(inst, slot)),
        Scope::CollaboratorDay { collaborator, day } => format!(
            "{} works {lhs} shifts on {}",
            inst.collaborators[collaborator].id, inst.days[day]
        ),
        Scope::Site(site) => format!("kindergarten {} has no female collaborator", inst.sites[site].id),
        Scope::Collaborator(c) => {
            debug_assert_eq!(family, Family::WeeklyLimit);
            format!(
                "{} works {lhs} paid minutes, cap {rhs}",
                inst.collaborators[c].id
            )
        }
    }
}

fn check_family(sch: &Schedule, inst: &Instance, family: Family) -> Vec<Violation> {
    let set = ConstraintSet::new(inst);
    let lhs = set.evaluate(inst, sch);
    violations_of(inst, &set, &lhs, Some(family))
}

fn violations_of(inst: &Instance, set: &ConstraintSet, lhs: &[i64], only: Option<Family>) -> Vec<Violation> {
    set.constraints()
        .iter()
        .zip(lhs)
        .filter(|(k, _)| only.map_or(true, |f| k.family == f))
        .filter(|(k, &v)| !k.is_satisfied(v))
        .map(|(k, &v)| Violation {
            kind: k.family.into(),
            location: k.scope.into(),
            detail: describe(inst, k.family, k.scope, v, k.rhs),
        })
        .collect()
}

/// One violation per active slot with nobody assigned.
pub fn check_coverage(sch: &Schedule, inst: &Instance) -> Vec<Violation> {
    check_family(sch, inst, Family::Coverage)
}

/// One violation per (collaborator, day) with two or more assignments.
pub fn check_one_shift_per_day(sch: &Schedule, inst: &Instance) -> Vec<Violation> {
    check_family(sch, inst, Family::OneShiftPerDay)
}

/// One violation per kindergarten without any female collaborator during the week.
pub fn check_kindergarten_female(sch: &Schedule, inst: &Instance) -> Vec<Violation> {
    check_family(sch, inst, Family::KindergartenFemale)
}

/// One violation per collaborator whose paid weekly minutes exceed the contract cap.
pub fn check_weekly_limits(sch: &Schedule, inst: &Instance) -> Vec<Violation> {
    check_family(sch, inst, Family::WeeklyLimit)
}

/// One violation per assignment outside the candidate domain or on an inactive slot.
pub fn check_candidate_domain(sch: &Schedule, inst: &Instance) -> Vec<Violation> {
    sch.iter()
        .filter(|a| {
            a.collaborator >= inst.n_collaborators()
                || !inst.is_candidate(a.collaborator, a.slot.site)
                || !inst.is_active(a.slot)
        })
        .map(|a| {
            let who = inst
                .collaborators
                .get(a.collaborator)
                .map_or("?", |c| c.id.as_str());
            let detail = if inst.is_active(a.slot) {
                format!("{who} is not allowed at {}", slot_label(inst, a.slot))
            } else {
                format!("{who} assigned to inactive slot {}", slot_label(inst, a.slot))
            };
            Violation {
                kind: ViolationKind::CandidateDomain,
                location: Location::Assignment {
                    collaborator: a.collaborator,
                    slot: a.slot,
                },
                detail,
            }
        })
        .collect()
}

/// All checks, in the order Coverage, OneShiftPerDay, KindergartenFemale,
/// WeeklyLimit, CandidateDomain.
pub fn verify(sch: &Schedule, inst: &Instance) -> ViolationReport {
    let domain = check_candidate_domain(sch, inst);
    // Unknown collaborators cannot be evaluated against the constraint rows.
    let known: Schedule = sch
        .iter()
        .copied()
        .filter(|a| a.collaborator < inst.n_collaborators())
        .collect();
    let set = ConstraintSet::new(inst);
    let lhs = set.evaluate(inst, &known);
    let mut violations = violations_of(inst, &set, &lhs, None);
    violations.extend(domain);
    ViolationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Collaborator, Contract, Gender, Level, Site, Timetable};
    use crate::objective::Assignment;
    use alloc::vec;

    fn toy() -> Instance {
        let sites = vec![
            Site::new("k", "A", Level::Kindergarten),
            Site::new("s", "A", Level::Secondary),
        ];
        let collabs = vec![
            Collaborator::new("f", Gender::Female, Contract::FullTime),
            Collaborator::new("m", Gender::Male, Contract::FullTime),
            Collaborator::new("b", Gender::Male, Contract::PartTime).bound_to([1]),
        ];
        let mut inst = Instance::with_defaults(sites, collabs);
        inst.days.truncate(2);
        inst.timetable = Timetable::empty(2, 2, 2);
        for d in 0..2 {
            inst.timetable.set(0, d, 0, Some("07:30-14:42".parse().unwrap()));
            inst.timetable.set(1, d, 0, Some("07:30-14:42".parse().unwrap()));
        }
        inst
    }

    fn a(c: usize, site: usize, day: usize, shift: usize) -> Assignment {
        Assignment::new(c, Slot::new(site, day, shift))
    }

    fn feasible() -> Schedule {
        [a(0, 0, 0, 0), a(1, 0, 1, 0), a(2, 1, 0, 0), a(2, 1, 1, 0)]
            .into_iter()
            .collect()
    }

    #[test]
    fn feasible_schedule_has_empty_report() {
        let inst = toy();
        assert!(verify(&feasible(), &inst).is_feasible());
    }

    #[test]
    fn one_uncovered_slot() {
        let inst = toy();
        let mut sch = feasible();
        sch.remove(&a(1, 0, 1, 0));
        let v = check_coverage(&sch, &inst);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].location, Location::Slot(Slot::new(0, 1, 0)));
        assert!(v[0].detail.contains("k Tue T1"));
    }

    #[test]
    fn two_shifts_same_day() {
        let mut inst = toy();
        inst.timetable.set(0, 0, 1, Some("09:00-13:00".parse().unwrap()));
        let mut sch = feasible();
        sch.insert(a(0, 0, 0, 1));
        assert_eq!(check_one_shift_per_day(&sch, &inst).len(), 1);
        let mut sch = feasible();
        sch.insert(a(0, 1, 0, 0));
        let v = check_one_shift_per_day(&sch, &inst);
        assert_eq!(v.len(), 1);
        assert_eq!(
            v[0].location,
            Location::CollaboratorDay {
                collaborator: 0,
                day: 0
            }
        );
        let mut sch = feasible();
        sch.insert(a(0, 0, 1, 0));
        assert!(check_one_shift_per_day(&sch, &inst).is_empty());
    }

    #[test]
    fn kindergarten_male_only() {
        let inst = toy();
        let sch: Schedule = [a(1, 0, 0, 0), a(1, 0, 1, 0), a(2, 1, 0, 0), a(2, 1, 1, 0)]
            .into_iter()
            .collect();
        let report = verify(&sch, &inst);
        assert_eq!(report.kinds(), vec![ViolationKind::KindergartenFemale]);
        // an empty kindergarten fails both checks independently
        let empty = Schedule::new();
        assert_eq!(check_kindergarten_female(&empty, &inst).len(), 1);
        assert_eq!(check_coverage(&empty, &inst).len(), 4);
    }

    #[test]
    fn weekly_limit_part_time() {
        let mut inst = toy();
        inst.days = vec!["Mon".into(), "Tue".into(), "Wed".into()];
        inst.timetable = Timetable::empty(2, 3, 2);
        for d in 0..3 {
            inst.timetable.set(1, d, 0, Some("07:30-14:42".parse().unwrap()));
        }
        let sch: Schedule = (0..3).map(|d| a(2, 1, d, 0)).collect();
        let v = check_weekly_limits(&sch, &inst);
        assert_eq!(v.len(), 1);
        assert!(v[0].detail.contains("1296"));
    }

    #[test]
    fn candidate_domain_violation() {
        let inst = toy();
        let mut sch = feasible();
        sch.insert(a(2, 0, 1, 0));
        let v = check_candidate_domain(&sch, &inst);
        assert_eq!(v.len(), 1);
        assert!(check_candidate_domain(&Schedule::new(), &inst).is_empty());
        let mut sch = feasible();
        sch.insert(a(0, 0, 0, 1));
        assert_eq!(check_candidate_domain(&sch, &inst).len(), 1);
    }
}
