//! Simulated annealing over assignment sets.
//!
//! Energy is the objective plus `10 · Σw` per violated hard-constraint row,
//! so one violation outweighs the whole objective range. Moves, drawn with
//! equal probability per family:
//!
//! * reassign: hand an assignment to an idle eligible collaborator, or move
//!   the collaborator to another slot of the same day;
//! * swap: exchange the collaborators of two assignments on the same day,
//!   or exchange two collaborators' whole weeks;
//! * add/remove: add an assignment on an idle day, or drop one from an
//!   over-staffed slot;
//! * relocate: move every assignment a collaborator has at one site to the
//!   same day and shift at another site of their domain.
//!
//! The week-level moves let a collaborator change site without passing
//! through schedules that pay for two sites.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::greedy::construct;
use super::state::{Problem, SearchState};
use super::{Clock, SolveResult};
use crate::model::{CollabIdx, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaParams {
    pub initial_temperature: f64,
    pub cooling_factor: f64,
    pub steps_per_temperature: u32,
    pub min_temperature: f64,
    pub time_limit_seconds: f64,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            initial_temperature: 1.0,
            cooling_factor: 0.995,
            steps_per_temperature: 200,
            min_temperature: 1e-4,
            time_limit_seconds: 5.0,
            seed: 0,
        }
    }
}

impl SaParams {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn is_valid(&self) -> bool {
        self.initial_temperature > 0.0
            && self.cooling_factor > 0.0
            && self.cooling_factor < 1.0
            && self.min_temperature > 0.0
            && self.time_limit_seconds >= 0.0
    }
}

#[derive(Debug, Clone)]
enum Undo {
    Nothing,
    Added(CollabIdx, usize),
    Removed(CollabIdx, usize),
    Moved {
        from: (CollabIdx, usize),
        to: (CollabIdx, usize),
    },
    Swapped {
        a: (CollabIdx, usize),
        b: (CollabIdx, usize),
    },
    /// Assignments removed then added, undone in reverse.
    Batch {
        removed: Vec<(CollabIdx, usize)>,
        added: Vec<(CollabIdx, usize)>,
    },
}

fn revert(st: &mut SearchState<'_, '_>, undo: Undo) {
    match undo {
        Undo::Nothing => {}
        Undo::Added(c, s) => {
            st.remove(c, s);
        }
        Undo::Removed(c, s) => {
            st.add(c, s);
        }
        Undo::Moved { from, to } => {
            st.remove(to.0, to.1);
            st.add(from.0, from.1);
        }
        Undo::Swapped { a, b } => {
            st.remove(a.0, b.1);
            st.remove(b.0, a.1);
            st.add(a.0, a.1);
            st.add(b.0, b.1);
        }
        Undo::Batch { removed, added } => {
            for (c, s) in added {
                st.remove(c, s);
            }
            for (c, s) in removed {
                st.add(c, s);
            }
        }
    }
}

fn eligible(p: &Problem<'_>, c: CollabIdx, slot: usize) -> bool {
    p.eligible[slot].binary_search(&c).is_ok()
}

fn apply_batch(
    st: &mut SearchState<'_, '_>,
    removed: Vec<(CollabIdx, usize)>,
    added: Vec<(CollabIdx, usize)>,
) -> Undo {
    for &(c, s) in &removed {
        st.remove(c, s);
    }
    let added: Vec<_> = added.into_iter().filter(|&(c, s)| st.add(c, s)).collect();
    Undo::Batch { removed, added }
}

/// Exchanges the whole weeks of two collaborators.
fn swap_weeks(st: &mut SearchState<'_, '_>, rng: &mut ChaCha8Rng) -> Undo {
    let p = st.p;
    let c1 = rng.gen_range(0..p.n_collab);
    let c2 = rng.gen_range(0..p.n_collab);
    if c1 == c2 {
        return Undo::Nothing;
    }
    let w1: Vec<(CollabIdx, usize)> = st.assignments().filter(|a| a.0 == c1).collect();
    let w2: Vec<(CollabIdx, usize)> = st.assignments().filter(|a| a.0 == c2).collect();
    if w1.iter().any(|&(_, s)| !eligible(p, c2, s)) || w2.iter().any(|&(_, s)| !eligible(p, c1, s)) {
        return Undo::Nothing;
    }
    let added = w1
        .iter()
        .map(|&(_, s)| (c2, s))
        .chain(w2.iter().map(|&(_, s)| (c1, s)))
        .collect();
    let removed = w1.into_iter().chain(w2).collect();
    apply_batch(st, removed, added)
}

/// Moves a collaborator's assignments at one site to another site.
fn relocate_site(st: &mut SearchState<'_, '_>, rng: &mut ChaCha8Rng) -> Undo {
    let p = st.p;
    if st.is_empty() {
        return Undo::Nothing;
    }
    let (c, s0) = st.get(rng.gen_range(0..st.len()));
    let from = p.site_of(s0);
    let to = rng.gen_range(0..p.n_sites);
    if to == from || !p.inst.is_candidate(c, to) {
        return Undo::Nothing;
    }
    let removed: Vec<(CollabIdx, usize)> = st
        .assignments()
        .filter(|&(x, s)| x == c && p.site_of(s) == from)
        .collect();
    let mut added = Vec::with_capacity(removed.len());
    for &(_, s) in &removed {
        let slot = p.slots[s];
        let target = crate::model::Slot::new(to, slot.day, slot.shift);
        match p.slot_index(target) {
            Some(t) => added.push((c, t)),
            None => return Undo::Nothing,
        }
    }
    apply_batch(st, removed, added)
}

fn propose(st: &mut SearchState<'_, '_>, rng: &mut ChaCha8Rng) -> Undo {
    let p = st.p;
    match rng.gen_range(0..4u8) {
        0 => {
            if st.is_empty() {
                return Undo::Nothing;
            }
            let (c, slot) = st.get(rng.gen_range(0..st.len()));
            let d = p.day_of(slot);
            if rng.gen_bool(0.5) {
                let pool = &p.eligible[slot];
                let c2 = pool[rng.gen_range(0..pool.len())];
                if c2 == c || st.day_load(c2, d) > 0 {
                    return Undo::Nothing;
                }
                st.remove(c, slot);
                st.add(c2, slot);
                Undo::Moved {
                    from: (c, slot),
                    to: (c2, slot),
                }
            } else {
                let opts = p.options(c, d);
                let s2 = opts[rng.gen_range(0..opts.len())];
                if s2 == slot || st.has(c, s2) {
                    return Undo::Nothing;
                }
                st.remove(c, slot);
                st.add(c, s2);
                Undo::Moved {
                    from: (c, slot),
                    to: (c, s2),
                }
            }
        }
        1 => {
            if rng.gen_bool(0.5) {
                return swap_weeks(st, rng);
            }
            if st.is_empty() {
                return Undo::Nothing;
            }
            let (c1, s1) = st.get(rng.gen_range(0..st.len()));
            let d = p.day_of(s1);
            let day = &p.slots_by_day[d];
            let s2 = day[rng.gen_range(0..day.len())];
            let staff = &st.slot_staff[s2];
            if s2 == s1 || staff.is_empty() {
                return Undo::Nothing;
            }
            let c2 = staff[rng.gen_range(0..staff.len())];
            if c2 == c1
                || !p.eligible[s2].contains(&c1)
                || !p.eligible[s1].contains(&c2)
                || st.has(c1, s2)
                || st.has(c2, s1)
            {
                return Undo::Nothing;
            }
            st.remove(c1, s1);
            st.remove(c2, s2);
            st.add(c1, s2);
            st.add(c2, s1);
            Undo::Swapped {
                a: (c1, s1),
                b: (c2, s2),
            }
        }
        3 => relocate_site(st, rng),
        _ => {
            if rng.gen_bool(0.5) {
                let c = rng.gen_range(0..p.n_collab);
                let d = rng.gen_range(0..p.n_days);
                let opts = p.options(c, d);
                if opts.is_empty() || st.day_load(c, d) > 0 {
                    return Undo::Nothing;
                }
                let s = opts[rng.gen_range(0..opts.len())];
                st.add(c, s);
                Undo::Added(c, s)
            } else {
                if st.is_empty() {
                    return Undo::Nothing;
                }
                let (c, s) = st.get(rng.gen_range(0..st.len()));
                if st.coverage(s) < 2 {
                    return Undo::Nothing;
                }
                st.remove(c, s);
                Undo::Removed(c, s)
            }
        }
    }
}

/// Anneals from the greedy construction and returns the best state seen,
/// preferring feasible ones (the penalty makes any feasible state beat any
/// infeasible one).
pub fn simulated_anneal(inst: &Instance, params: &SaParams, clock: &dyn Clock) -> SolveResult {
    let t0 = clock.now_seconds();
    let p = Problem::new(inst);
    let mut st = construct(&p, params.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x005e_eda1_1ea1);

    let mut energy = st.energy();
    let mut best_energy = energy;
    let mut best: Vec<(CollabIdx, usize)> = st.assignments().collect();
    let mut trace = Vec::new();
    let mut iterations = 0u64;

    let budget = params.steps_per_temperature > 0
        && params.time_limit_seconds > 0.0
        && params.is_valid()
        && p.n_slots() > 0
        && p.n_collab > 0;
    let mut temperature = params.initial_temperature;
    'outer: while budget && temperature > params.min_temperature {
        for _ in 0..params.steps_per_temperature {
            iterations += 1;
            let undo = propose(&mut st, &mut rng);
            if matches!(undo, Undo::Nothing) {
                continue;
            }
            let e = st.energy();
            let delta = e - energy;
            if delta <= 0.0 || rng.gen::<f64>() < libm::exp(-delta / temperature) {
                energy = e;
                if e < best_energy {
                    best_energy = e;
                    best.clear();
                    best.extend(st.assignments());
                }
            } else {
                revert(&mut st, undo);
            }
            if iterations % 1024 == 0 && clock.now_seconds() - t0 >= params.time_limit_seconds {
                trace.push(best_energy);
                break 'outer;
            }
        }
        trace.push(best_energy);
        temperature *= params.cooling_factor;
    }

    let mut best_state = SearchState::new(&p);
    for (c, s) in best {
        best_state.add(c, s);
    }
    polish(&mut best_state);

    let mut result = SolveResult::finish(
        inst,
        best_state.to_schedule(),
        clock.now_seconds() - t0,
        false,
        iterations,
    );
    if let Some(last) = trace.last_mut() {
        *last = last.min(best_state.energy());
    }
    result.trace = trace;
    result
}

/// First-improvement descent over single add/remove/relocate moves.
fn polish(st: &mut SearchState<'_, '_>) {
    let p = st.p;
    loop {
        let base = st.energy();
        let mut improved = false;
        for c in 0..p.n_collab {
            for d in 0..p.n_days {
                let current: Vec<usize> = st.day_slots[c * p.n_days + d].clone();
                for &s in &current {
                    st.remove(c, s);
                    if st.energy() < base - 1e-12 {
                        improved = true;
                        break;
                    }
                    st.add(c, s);
                }
                if improved {
                    break;
                }
                for &s2 in p.options(c, d) {
                    if st.has(c, s2) {
                        continue;
                    }
                    let undo: Vec<usize> = st.day_slots[c * p.n_days + d].clone();
                    for &s in &undo {
                        st.remove(c, s);
                    }
                    st.add(c, s2);
                    if st.energy() < base - 1e-12 {
                        improved = true;
                        break;
                    }
                    st.remove(c, s2);
                    for &s in &undo {
                        st.add(c, s);
                    }
                }
                if improved {
                    break;
                }
            }
            if improved {
                break;
            }
        }
        if !improved {
            return;
        }
    }
}
