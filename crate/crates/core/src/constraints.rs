//! Hard constraints as linear inequalities over assignment indicators.
//!
//! The feasibility checker and the QUBO encoder both read this table, so
//! coefficients, senses and right-hand sides cannot drift apart. Binding
//! sites are not listed here: they shape the variable domain instead.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{active_slots, CollabIdx, Instance, SiteIdx, Slot};
use crate::objective::{worked_minutes, Assignment, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    Coverage,
    OneShiftPerDay,
    KindergartenFemale,
    WeeklyLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    AtLeast,
    AtMost,
}

/// What a constraint ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scope {
    Slot(Slot),
    CollaboratorDay { collaborator: CollabIdx, day: usize },
    Site(SiteIdx),
    Collaborator(CollabIdx),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub family: Family,
    pub scope: Scope,
    pub sense: Sense,
    pub rhs: i64,
}

impl LinearConstraint {
    /// Coefficient of the indicator of `a` in this constraint's left-hand side.
    pub fn coefficient(&self, inst: &Instance, a: &Assignment) -> i64 {
        let Some(q) = inst.duration(a.slot) else {
            return 0;
        };
        match self.scope {
            Scope::Slot(s) => i64::from(a.slot == s),
            Scope::CollaboratorDay { collaborator, day } => {
                i64::from(a.collaborator == collaborator && a.slot.day == day)
            }
            Scope::Site(s) => {
                i64::from(a.slot.site == s && inst.collaborators[a.collaborator].is_female())
            }
            Scope::Collaborator(c) => {
                if a.collaborator == c {
                    i64::from(inst.params.paid_minutes(q))
                } else {
                    0
                }
            }
        }
    }

    pub fn is_satisfied(&self, lhs: i64) -> bool {
        match self.sense {
            Sense::AtLeast => lhs >= self.rhs,
            Sense::AtMost => lhs <= self.rhs,
        }
    }

    /// Nonzero terms over the candidate-domain variables, in variable order.
    pub fn domain_terms(&self, inst: &Instance) -> Vec<(Assignment, i64)> {
        domain_assignments(inst)
            .into_iter()
            .filter_map(|a| {
                let k = self.coefficient(inst, &a);
                (k != 0).then_some((a, k))
            })
            .collect()
    }
}

/// Every assignment allowed by the candidate domains, ordered by
/// (collaborator, site, day, shift).
pub fn domain_assignments(inst: &Instance) -> Vec<Assignment> {
    let slots = active_slots(inst);
    let mut out = Vec::new();
    for c in 0..inst.n_collaborators() {
        for &slot in &slots {
            if inst.is_candidate(c, slot.site) {
                out.push(Assignment::new(c, slot));
            }
        }
    }
    out
}

/// All hard constraints of an instance in a fixed order, with an index for
/// evaluating them in one pass over a schedule.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    constraints: Vec<LinearConstraint>,
    by_scope: BTreeMap<Scope, usize>,
}

impl ConstraintSet {
    pub fn new(inst: &Instance) -> Self {
        let mut constraints = Vec::new();
        for slot in active_slots(inst) {
            constraints.push(LinearConstraint {
                family: Family::Coverage,
                scope: Scope::Slot(slot),
                sense: Sense::AtLeast,
                rhs: 1,
            });
        }
        for c in 0..inst.n_collaborators() {
            for d in 0..inst.n_days() {
                constraints.push(LinearConstraint {
                    family: Family::OneShiftPerDay,
                    scope: Scope::CollaboratorDay {
                        collaborator: c,
                        day: d,
                    },
                    sense: Sense::AtMost,
                    rhs: 1,
                });
            }
        }
        for s in 0..inst.n_sites() {
            if inst.is_kindergarten(s) {
                constraints.push(LinearConstraint {
                    family: Family::KindergartenFemale,
                    scope: Scope::Site(s),
                    sense: Sense::AtLeast,
                    rhs: 1,
                });
            }
        }
        for c in 0..inst.n_collaborators() {
            constraints.push(LinearConstraint {
                family: Family::WeeklyLimit,
                scope: Scope::Collaborator(c),
                sense: Sense::AtMost,
                rhs: i64::from(inst.weekly_cap(c)),
            });
        }
        let by_scope = constraints
            .iter()
            .enumerate()
            .map(|(i, k)| (k.scope, i))
            .collect();
        Self {
            constraints,
            by_scope,
        }
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Left-hand sides of every constraint for `sch`.
    ///
    /// The weekly limit uses the daily break rule of
    /// [`worked_minutes`](crate::objective::worked_minutes): one break per day
    /// with a long shift. Its linear coefficients give the same value
    /// whenever the one-shift-per-day rows hold.
    pub fn evaluate(&self, inst: &Instance, sch: &Schedule) -> Vec<i64> {
        let mut lhs = vec![0i64; self.constraints.len()];
        for a in sch {
            if !inst.is_active(a.slot) {
                continue;
            }
            let touched = [
                Scope::Slot(a.slot),
                Scope::CollaboratorDay {
                    collaborator: a.collaborator,
                    day: a.slot.day,
                },
                Scope::Site(a.slot.site),
            ];
            for scope in touched {
                if let Some(&i) = self.by_scope.get(&scope) {
                    lhs[i] += self.constraints[i].coefficient(inst, a);
                }
            }
        }
        for c in 0..inst.n_collaborators() {
            if let Some(&i) = self.by_scope.get(&Scope::Collaborator(c)) {
                lhs[i] = i64::from(worked_minutes(sch, inst, c).1);
            }
        }
        lhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Collaborator, Contract, Gender, Level, Site, Timetable};

    fn toy() -> Instance {
        let sites = vec![
            Site::new("k", "A", Level::Kindergarten),
            Site::new("p", "A", Level::Primary),
        ];
        let collabs = vec![
            Collaborator::new("f", Gender::Female, Contract::FullTime),
            Collaborator::new("m", Gender::Male, Contract::FullTime).bound_to([1]),
        ];
        let mut inst = Instance::with_defaults(sites, collabs);
        inst.days.truncate(2);
        inst.shifts.truncate(1);
        inst.timetable = Timetable::empty(2, 2, 1);
        for d in 0..2 {
            inst.timetable.set(0, d, 0, Some("07:30-14:42".parse().unwrap()));
            inst.timetable.set(1, d, 0, Some("07:45-16:30".parse().unwrap()));
        }
        inst
    }

    #[test]
    fn table_layout() {
        let inst = toy();
        let set = ConstraintSet::new(&inst);
        // 4 coverage + 4 collaborator-days + 1 kindergarten + 2 weekly
        assert_eq!(set.len(), 11);
        let fams: Vec<Family> = set.constraints().iter().map(|k| k.family).collect();
        assert!(fams.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn domain_excludes_unbound_sites() {
        let inst = toy();
        let vars = domain_assignments(&inst);
        // f: 4 slots, m: 2 slots at site 1
        assert_eq!(vars.len(), 6);
        assert!(vars.iter().all(|a| a.collaborator == 0 || a.slot.site == 1));
    }

    #[test]
    fn weekly_coefficients_are_paid_minutes() {
        let inst = toy();
        let set = ConstraintSet::new(&inst);
        let weekly = set
            .constraints()
            .iter()
            .find(|k| k.scope == Scope::Collaborator(0))
            .unwrap();
        let terms = weekly.domain_terms(&inst);
        let coeffs: Vec<i64> = terms.iter().map(|t| t.1).collect();
        assert_eq!(coeffs, vec![432, 432, 495, 495]);
    }

    #[test]
    fn evaluation_matches_term_sums_under_one_shift_per_day() {
        let inst = toy();
        let set = ConstraintSet::new(&inst);
        let sch: Schedule = [
            Assignment::new(0, Slot::new(0, 0, 0)),
            Assignment::new(0, Slot::new(1, 1, 0)),
            Assignment::new(1, Slot::new(1, 0, 0)),
        ]
        .into_iter()
        .collect();
        let lhs = set.evaluate(&inst, &sch);
        for (k, &v) in set.constraints().iter().zip(&lhs) {
            let linear: i64 = k
                .domain_terms(&inst)
                .iter()
                .filter(|(a, _)| sch.contains(a))
                .map(|(_, w)| w)
                .sum();
            assert_eq!(linear, v, "{k:?}");
        }
    }
}
