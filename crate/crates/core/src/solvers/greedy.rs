use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::state::{Problem, SearchState};
use super::{Clock, NoClock, SolveResult};
use crate::model::{CollabIdx, Instance};

fn available(st: &SearchState<'_, '_>, c: CollabIdx, slot: usize) -> bool {
    let p = st.p;
    st.day_load(c, p.day_of(slot)) == 0 && st.paid_week[c] + i64::from(p.paid[slot]) <= p.cap[c]
}

fn delta_of_add(st: &mut SearchState<'_, '_>, c: CollabIdx, slot: usize) -> f64 {
    let before = st.objective();
    st.add(c, slot);
    let after = st.objective();
    st.remove(c, slot);
    after - before
}

/// Covers slots one at a time, most constrained first, then repairs
/// kindergartens that ended up without a female collaborator.
pub(crate) fn construct<'p, 'a>(p: &'p Problem<'a>, seed: u64) -> SearchState<'p, 'a> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = SearchState::new(p);
    let mut open: alloc::vec::Vec<usize> = (0..p.n_slots()).collect();

    while !open.is_empty() {
        // slot with the fewest collaborators still able to take it
        let (pick, _) = open
            .iter()
            .enumerate()
            .map(|(i, &slot)| {
                let n = p.eligible[slot]
                    .iter()
                    .filter(|&&c| available(&st, c, slot))
                    .count();
                (i, n)
            })
            .min_by_key(|&(i, n)| (n, i))
            .expect("open is non-empty");
        let slot = open.remove(pick);

        let mut best: Option<(f64, CollabIdx)> = None;
        let mut ties = 0u32;
        for &c in &p.eligible[slot] {
            if !available(&st, c, slot) {
                continue;
            }
            let d = delta_of_add(&mut st, c, slot);
            match best {
                Some((bd, _)) if d > bd + 1e-12 => {}
                Some((bd, _)) if (d - bd).abs() <= 1e-12 => {
                    ties += 1;
                    if rng.gen_range(0..=ties) == 0 {
                        best = Some((bd, c));
                    }
                }
                _ => {
                    best = Some((d, c));
                    ties = 0;
                }
            }
        }
        if let Some((_, c)) = best {
            st.add(c, slot);
        }
    }

    for slot in 0..p.n_slots() {
        if st.coverage(slot) == 0 {
            augment(&mut st, slot);
        }
    }
    repair_kindergartens(&mut st);
    st
}

/// Covers `target` by shifting collaborators along a chain of same-day
/// slots, ending at an idle collaborator or one from an over-staffed slot.
fn augment(st: &mut SearchState<'_, '_>, target: usize) -> bool {
    let p = st.p;
    let d = p.day_of(target);
    let mut parent: alloc::collections::BTreeMap<usize, (usize, CollabIdx)> = Default::default();
    let mut queue = alloc::collections::VecDeque::from([target]);
    parent.insert(target, (usize::MAX, usize::MAX));
    while let Some(t) = queue.pop_front() {
        for &c in &p.eligible[t] {
            let from = st.day_slots[c * p.n_days + d].first().copied();
            let before = from.map_or(0, |u| i64::from(p.paid[u]));
            if from == Some(t)
                || st.paid_week[c] - before + i64::from(p.paid[t]) > p.cap[c]
                || st.day_load(c, d) > 1
            {
                continue;
            }
            match from {
                Some(u) if st.coverage(u) < 2 => {
                    if let alloc::collections::btree_map::Entry::Vacant(e) = parent.entry(u) {
                        e.insert((t, c));
                        queue.push_back(u);
                    }
                }
                _ => {
                    if let Some(u) = from {
                        st.remove(c, u);
                    }
                    st.add(c, t);
                    let mut x = t;
                    while x != target {
                        let (prev, mover) = parent[&x];
                        st.remove(mover, x);
                        st.add(mover, prev);
                        x = prev;
                    }
                    return true;
                }
            }
        }
    }
    false
}

fn repair_kindergartens(st: &mut SearchState<'_, '_>) {
    let p = st.p;
    for site in 0..p.n_sites {
        if !p.kindergarten[site] || st.female_at(site) > 0 {
            continue;
        }
        'slots: for slot in (0..p.n_slots()).filter(|&s| p.site_of(s) == site) {
            let staff = st.slot_staff[slot].clone();
            for &f in p.eligible[slot].iter().filter(|&&c| p.female[c]) {
                let d = p.day_of(slot);
                let other: Option<usize> = st.day_slots[f * p.n_days + d].first().copied();
                match other {
                    None => {
                        let Some(&m) = staff.first() else {
                            if available(st, f, slot) {
                                st.add(f, slot);
                                break 'slots;
                            }
                            continue;
                        };
                        st.remove(m, slot);
                        if available(st, f, slot) {
                            st.add(f, slot);
                            break 'slots;
                        }
                        st.add(m, slot);
                    }
                    Some(t) => {
                        // swap the day's duties of f and one of the slot's staff
                        for &m in &staff {
                            if !p.eligible[t].contains(&m) {
                                continue;
                            }
                            st.remove(m, slot);
                            st.remove(f, t);
                            if available(st, f, slot) && available(st, m, t) {
                                st.add(f, slot);
                                st.add(m, t);
                                break 'slots;
                            }
                            st.add(f, t);
                            st.add(m, slot);
                        }
                    }
                }
            }
        }
    }
}

/// Greedy construction. The result may be infeasible; `feasible` says so.
pub fn greedy_construct(inst: &Instance, seed: u64) -> SolveResult {
    greedy_with_clock(inst, seed, &NoClock)
}

pub(crate) fn greedy_with_clock(inst: &Instance, seed: u64, clock: &dyn Clock) -> SolveResult {
    let t0 = clock.now_seconds();
    let p = Problem::new(inst);
    let st = construct(&p, seed);
    SolveResult::finish(
        inst,
        st.to_schedule(),
        clock.now_seconds() - t0,
        false,
        p.n_slots() as u64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::verify;
    use crate::instances::build_real_case;
    use crate::model::{Collaborator, Contract, Gender, Level, Site, Timetable};

    #[test]
    fn real_case_is_feasible_and_reasonable() {
        let inst = build_real_case();
        let r = greedy_construct(&inst, 1);
        assert!(r.feasible, "{:?}", verify(&r.schedule, &inst));
        assert!(r.objective() <= 0.12, "greedy total {}", r.objective());
        assert!(r.schedule.len() >= 90);
    }

    #[test]
    fn single_collaborator_takes_everything_within_cap() {
        let sites = alloc::vec![Site::new("p", "A", Level::Primary)];
        let collabs = alloc::vec![Collaborator::new("solo", Gender::Male, Contract::FullTime)];
        let mut inst = Instance::with_defaults(sites, collabs);
        inst.shifts.truncate(1);
        inst.timetable = Timetable::empty(1, 5, 1);
        for d in 0..5 {
            inst.timetable.set(0, d, 0, Some("07:30-14:42".parse().unwrap()));
        }
        let r = greedy_construct(&inst, 0);
        assert_eq!(r.schedule.len(), 5);
        assert!(r.feasible);
        assert_eq!(r.breakdown.hours_deviation, 0.0);
    }

    #[test]
    fn coverage_screen_failure_is_flagged() {
        let sites = alloc::vec![
            Site::new("p", "A", Level::Primary),
            Site::new("s", "A", Level::Secondary),
        ];
        let collabs = alloc::vec![
            Collaborator::new("a", Gender::Male, Contract::FullTime),
            Collaborator::new("b", Gender::Male, Contract::FullTime),
        ];
        let mut inst = Instance::with_defaults(sites, collabs);
        inst.days.truncate(1);
        inst.timetable = Timetable::empty(2, 1, 2);
        inst.timetable.set(0, 0, 0, Some("08:00-12:00".parse().unwrap()));
        inst.timetable.set(0, 0, 1, Some("13:00-17:00".parse().unwrap()));
        inst.timetable.set(1, 0, 0, Some("08:00-12:00".parse().unwrap()));
        let r = greedy_construct(&inst, 0);
        assert!(!r.feasible);
    }

    #[test]
    fn deterministic_for_seed() {
        let inst = build_real_case();
        assert_eq!(greedy_construct(&inst, 5), greedy_construct(&inst, 5));
    }
}
