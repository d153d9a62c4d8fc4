//! Exhaustive enumeration used as a reference on tiny instances.
//!
//! Deliberately independent of the incremental search state: every leaf is
//! judged with the constraint rows and the pure objective functions.

use alloc::vec::Vec;

use thiserror::Error;

use super::{Clock, NoClock, SolveResult};
use crate::constraints::ConstraintSet;
use crate::model::{active_slots, Instance, Slot};
use crate::objective::{total_objective, Assignment, Schedule};

/// Largest search space the oracle agrees to enumerate.
pub const MAX_ORACLE_LEAVES: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search space has {leaves} leaves, limit is {limit}")]
    SpaceTooLarge { leaves: u128, limit: u128 },
}

fn choices(inst: &Instance) -> Vec<Vec<Slot>> {
    let slots = active_slots(inst);
    let mut out = Vec::new();
    for c in 0..inst.n_collaborators() {
        for d in 0..inst.n_days() {
            out.push(
                slots
                    .iter()
                    .copied()
                    .filter(|s| s.day == d && inst.is_candidate(c, s.site))
                    .collect(),
            );
        }
    }
    out
}

/// Product over (collaborator, day) of 1 + the number of slots that day in
/// the collaborator's domain. Saturates at `u128::MAX`.
pub fn leaf_count(inst: &Instance) -> u128 {
    choices(inst)
        .iter()
        .fold(1u128, |acc, opts| acc.saturating_mul(opts.len() as u128 + 1))
}

struct Search<'a> {
    inst: &'a Instance,
    rows: ConstraintSet,
    choices: Vec<Vec<Slot>>,
    nd: usize,
    current: Schedule,
    best: Option<(usize, f64, Schedule)>,
    leaves: u64,
}

impl Search<'_> {
    fn visit(&mut self, k: usize) {
        if k == self.choices.len() {
            self.leaves += 1;
            let lhs = self.rows.evaluate(self.inst, &self.current);
            let violated = self
                .rows
                .constraints()
                .iter()
                .zip(&lhs)
                .filter(|(row, &v)| !row.is_satisfied(v))
                .count();
            let obj = total_objective(&self.current, self.inst).total;
            let better = match &self.best {
                None => true,
                Some((bv, bo, _)) => violated < *bv || (violated == *bv && obj < *bo),
            };
            if better {
                self.best = Some((violated, obj, self.current.clone()));
            }
            return;
        }
        self.visit(k + 1);
        let c = k / self.nd;
        for i in 0..self.choices[k].len() {
            let a = Assignment::new(c, self.choices[k][i]);
            self.current.insert(a);
            self.visit(k + 1);
            self.current.remove(&a);
        }
    }
}

/// Global optimum by enumeration. When no schedule is feasible, returns the
/// one with the fewest violated rows (then lowest objective), flagged
/// infeasible.
pub fn brute_force_oracle(inst: &Instance) -> Result<SolveResult, OracleError> {
    oracle_with_clock(inst, &NoClock)
}

pub(crate) fn oracle_with_clock(
    inst: &Instance,
    clock: &dyn Clock,
) -> Result<SolveResult, OracleError> {
    let leaves = leaf_count(inst);
    if leaves > MAX_ORACLE_LEAVES {
        return Err(OracleError::SpaceTooLarge {
            leaves,
            limit: MAX_ORACLE_LEAVES,
        });
    }
    let t0 = clock.now_seconds();
    let mut search = Search {
        inst,
        rows: ConstraintSet::new(inst),
        choices: choices(inst),
        nd: inst.n_days().max(1),
        current: Schedule::new(),
        best: None,
        leaves: 0,
    };
    search.visit(0);
    let (_, _, schedule) = search.best.take().expect("at least one leaf");
    Ok(SolveResult::finish(
        inst,
        schedule,
        clock.now_seconds() - t0,
        true,
        search.leaves,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::build_real_case;
    use crate::model::{Collaborator, Contract, Gender, Level, Site, Timetable};

    fn two_by_two() -> Instance {
        let sites = alloc::vec![Site::new("p", "A", Level::Primary)];
        let collabs = alloc::vec![
            Collaborator::new("a", Gender::Male, Contract::FullTime),
            Collaborator::new("b", Gender::Female, Contract::FullTime),
        ];
        let mut inst = Instance::with_defaults(sites, collabs);
        inst.days.truncate(2);
        inst.timetable = Timetable::empty(1, 2, 2);
        for d in 0..2 {
            inst.timetable.set(0, d, 0, Some("08:00-12:00".parse().unwrap()));
            inst.timetable.set(0, d, 1, Some("13:00-17:00".parse().unwrap()));
        }
        inst
    }

    #[test]
    fn enumerates_every_leaf() {
        let inst = two_by_two();
        assert_eq!(leaf_count(&inst), 81);
        let r = brute_force_oracle(&inst).unwrap();
        assert_eq!(r.iterations, 81);
        assert!(r.feasible && r.proven_optimal);
        assert_eq!(r.schedule.len(), 4);
    }

    #[test]
    fn infeasible_toy_returns_least_violating() {
        let mut inst = two_by_two();
        inst.sites.push(Site::new("s", "A", Level::Secondary));
        let mut tt = Timetable::empty(2, 2, 2);
        for d in 0..2 {
            for j in 0..2 {
                tt.set(0, d, j, inst.timetable.get(0, d, j).copied());
            }
            tt.set(1, d, 0, Some("08:00-12:00".parse().unwrap()));
        }
        inst.timetable = tt;
        let r = brute_force_oracle(&inst).unwrap();
        assert!(!r.feasible);
        // one slot per day must stay uncovered
        assert_eq!(r.schedule.len(), 4);
    }

    #[test]
    fn real_case_is_refused() {
        let err = brute_force_oracle(&build_real_case()).unwrap_err();
        assert!(matches!(err, OracleError::SpaceTooLarge { leaves, .. } if leaves > MAX_ORACLE_LEAVES));
    }
}
