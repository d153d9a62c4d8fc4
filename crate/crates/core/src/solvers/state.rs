//! Index tables and an incrementally maintained search state.
//!
//! [`SearchState`] keeps the same integer aggregates as
//! [`objective::tally`](crate::objective::tally) plus per-family violation
//! counters, so adding or removing one assignment updates the energy in
//! O(1) amortized time.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{active_slots, CollabIdx, Instance, Slot};
use crate::objective::{
    breakdown_from_tally, total_target_minutes, Assignment, Denominators, ObjectiveBreakdown,
    Schedule, Tally,
};

const ABSENT: usize = usize::MAX;

/// Instance data flattened into index arrays.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub inst: &'a Instance,
    pub den: Denominators,
    pub n_collab: usize,
    pub n_sites: usize,
    pub n_days: usize,
    pub slots: Vec<Slot>,
    /// Dense (site, day, shift) → slot index.
    slot_lookup: Vec<usize>,
    pub gross: Vec<u32>,
    pub paid: Vec<u32>,
    pub long: Vec<bool>,
    pub slots_by_day: Vec<Vec<usize>>,
    /// Collaborators whose candidate domain contains the slot's site.
    pub eligible: Vec<Vec<CollabIdx>>,
    /// `[c * n_days + d]` → slots of day `d` in `c`'s domain.
    pub options: Vec<Vec<usize>>,
    pub cap: Vec<i64>,
    pub female: Vec<bool>,
    pub kindergarten: Vec<bool>,
    /// `[c * n_sites + s]` → the preference term charges `c` at `s`.
    pub pref_hit: Vec<bool>,
    pub penalty: f64,
    /// Largest weekly cap, at least 1.
    pub max_cap: i64,
}

impl<'a> Problem<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let slots = active_slots(inst);
        let (ns, nd, nj) = (inst.n_sites(), inst.n_days(), inst.n_shifts());
        let nc = inst.n_collaborators();
        let mut slot_lookup = vec![ABSENT; ns * nd * nj];
        for (i, s) in slots.iter().enumerate() {
            slot_lookup[(s.site * nd + s.day) * nj + s.shift] = i;
        }
        let gross: Vec<u32> = slots.iter().map(|s| inst.duration(*s).unwrap_or(0)).collect();
        let paid = gross.iter().map(|&q| inst.params.paid_minutes(q)).collect();
        let long = gross.iter().map(|&q| inst.params.needs_break(q)).collect();
        let mut slots_by_day = vec![Vec::new(); nd];
        for (i, s) in slots.iter().enumerate() {
            slots_by_day[s.day].push(i);
        }
        let eligible = slots
            .iter()
            .map(|s| (0..nc).filter(|&c| inst.is_candidate(c, s.site)).collect())
            .collect();
        let mut options = vec![Vec::new(); nc * nd];
        for c in 0..nc {
            for (i, s) in slots.iter().enumerate() {
                if inst.is_candidate(c, s.site) {
                    options[c * nd + s.day].push(i);
                }
            }
        }
        let pref_hit = (0..nc)
            .flat_map(|c| (0..ns).map(move |s| (c, s)))
            .map(|(c, s)| inst.is_preference_violation(c, s))
            .collect();
        Self {
            inst,
            den: Denominators::of(inst),
            n_collab: nc,
            n_sites: ns,
            n_days: nd,
            slot_lookup,
            gross,
            paid,
            long,
            slots_by_day,
            eligible,
            options,
            max_cap: (0..nc)
                .map(|c| i64::from(inst.weekly_cap(c)))
                .max()
                .unwrap_or(1)
                .max(1),
            cap: (0..nc).map(|c| i64::from(inst.weekly_cap(c))).collect(),
            female: inst.collaborators.iter().map(|c| c.is_female()).collect(),
            kindergarten: inst.sites.iter().map(|s| s.is_kindergarten()).collect(),
            pref_hit,
            penalty: 10.0 * inst.effective_weights().sum(),
            slots,
        }
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn slot_index(&self, slot: Slot) -> Option<usize> {
        let nj = self.inst.n_shifts();
        if slot.site >= self.n_sites || slot.day >= self.n_days || slot.shift >= nj {
            return None;
        }
        let i = self.slot_lookup[(slot.site * self.n_days + slot.day) * nj + slot.shift];
        (i != ABSENT).then_some(i)
    }

    pub fn options(&self, c: CollabIdx, d: usize) -> &[usize] {
        &self.options[c * self.n_days + d]
    }

    pub fn site_of(&self, slot: usize) -> usize {
        self.slots[slot].site
    }

    pub fn day_of(&self, slot: usize) -> usize {
        self.slots[slot].day
    }
}

/// Violation counters, one per hard-constraint family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Violations {
    pub uncovered: u32,
    pub crowded_days: u32,
    pub kindergartens_without_female: u32,
    pub over_cap: u32,
}

impl Violations {
    pub fn total(&self) -> u32 {
        self.uncovered + self.crowded_days + self.kindergartens_without_female + self.over_cap
    }
}

#[derive(Debug, Clone)]
pub struct SearchState<'p, 'a> {
    pub p: &'p Problem<'a>,
    list: Vec<(CollabIdx, usize)>,
    pos: Vec<usize>,
    pub slot_staff: Vec<Vec<CollabIdx>>,
    pub day_slots: Vec<Vec<usize>>,
    day_gross: Vec<u32>,
    day_long: Vec<u32>,
    pub paid_week: Vec<i64>,
    site_count: Vec<u32>,
    pub sites_of: Vec<u32>,
    female_at: Vec<u32>,
    pub tally: Tally,
    pub viol: Violations,
    /// Σ over collaborators of paid minutes above the weekly cap.
    pub excess_minutes: i64,
}

impl<'p, 'a> SearchState<'p, 'a> {
    pub fn new(p: &'p Problem<'a>) -> Self {
        let (nc, nd, ns, nslots) = (p.n_collab, p.n_days, p.n_sites, p.n_slots());
        let kinder = p.kindergarten.iter().filter(|&&k| k).count() as u32;
        Self {
            p,
            list: Vec::new(),
            pos: vec![ABSENT; nc * nslots],
            slot_staff: vec![Vec::new(); nslots],
            day_slots: vec![Vec::new(); nc * nd],
            day_gross: vec![0; nc * nd],
            day_long: vec![0; nc * nd],
            paid_week: vec![0; nc],
            site_count: vec![0; nc * ns],
            sites_of: vec![0; nc],
            female_at: vec![0; ns],
            tally: Tally {
                sites_used: 0,
                shortfall_minutes: total_target_minutes(p.inst),
                preference_hits: 0,
            },
            viol: Violations {
                uncovered: nslots as u32,
                crowded_days: 0,
                kindergartens_without_female: kinder,
                over_cap: 0,
            },
            excess_minutes: 0,
        }
    }

    /// Starts from an existing schedule. Assignments on inactive slots are dropped.
    pub fn from_schedule(p: &'p Problem<'a>, sch: &Schedule) -> Self {
        let mut st = Self::new(p);
        for a in sch {
            if let Some(i) = p.slot_index(a.slot) {
                if a.collaborator < p.n_collab {
                    st.add(a.collaborator, i);
                }
            }
        }
        st
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn get(&self, i: usize) -> (CollabIdx, usize) {
        self.list[i]
    }

    pub fn has(&self, c: CollabIdx, slot: usize) -> bool {
        self.pos[c * self.p.n_slots() + slot] != ABSENT
    }

    pub fn day_load(&self, c: CollabIdx, d: usize) -> usize {
        self.day_slots[c * self.p.n_days + d].len()
    }

    pub fn coverage(&self, slot: usize) -> usize {
        self.slot_staff[slot].len()
    }

    pub fn site_count(&self, c: CollabIdx, s: usize) -> u32 {
        self.site_count[c * self.p.n_sites + s]
    }

    pub fn female_at(&self, s: usize) -> u32 {
        self.female_at[s]
    }

    fn paid_day(&self, k: usize) -> i64 {
        let g = self.day_gross[k];
        let paid = if self.day_long[k] > 0 {
            g.saturating_sub(self.p.inst.params.break_minutes)
        } else {
            g
        };
        i64::from(paid)
    }

    fn update_day(&mut self, c: CollabIdx, k: usize, before_paid: i64, before_len: usize) {
        let after = self.paid_day(k);
        let cap = self.p.cap[c];
        let was_over = self.paid_week[c] > cap;
        self.excess_minutes -= (self.paid_week[c] - cap).max(0);
        self.paid_week[c] += after - before_paid;
        self.excess_minutes += (self.paid_week[c] - cap).max(0);
        self.tally.shortfall_minutes -= after - before_paid;
        let is_over = self.paid_week[c] > self.p.cap[c];
        match (was_over, is_over) {
            (false, true) => self.viol.over_cap += 1,
            (true, false) => self.viol.over_cap -= 1,
            _ => {}
        }
        let after_len = self.day_slots[k].len();
        match (before_len > 1, after_len > 1) {
            (false, true) => self.viol.crowded_days += 1,
            (true, false) => self.viol.crowded_days -= 1,
            _ => {}
        }
    }

    /// Adds `c` to `slot`. Returns `false` if already present.
    pub fn add(&mut self, c: CollabIdx, slot: usize) -> bool {
        let n = self.p.n_slots();
        if self.pos[c * n + slot] != ABSENT {
            return false;
        }
        self.pos[c * n + slot] = self.list.len();
        self.list.push((c, slot));

        if self.slot_staff[slot].is_empty() {
            self.viol.uncovered -= 1;
        }
        self.slot_staff[slot].push(c);

        let site = self.p.site_of(slot);
        let d = self.p.day_of(slot);
        let k = c * self.p.n_days + d;
        let before_paid = self.paid_day(k);
        let before_len = self.day_slots[k].len();
        self.day_slots[k].push(slot);
        self.day_gross[k] += self.p.gross[slot];
        self.day_long[k] += u32::from(self.p.long[slot]);
        self.update_day(c, k, before_paid, before_len);

        let sk = c * self.p.n_sites + site;
        if self.site_count[sk] == 0 {
            self.tally.sites_used += 1;
            self.sites_of[c] += 1;
        }
        self.site_count[sk] += 1;
        if self.p.pref_hit[sk] {
            self.tally.preference_hits += 1;
        }
        if self.p.female[c] && self.p.kindergarten[site] {
            if self.female_at[site] == 0 {
                self.viol.kindergartens_without_female -= 1;
            }
            self.female_at[site] += 1;
        }
        true
    }

    /// Removes `c` from `slot`. Returns `false` if absent.
    pub fn remove(&mut self, c: CollabIdx, slot: usize) -> bool {
        let n = self.p.n_slots();
        let at = self.pos[c * n + slot];
        if at == ABSENT {
            return false;
        }
        self.pos[c * n + slot] = ABSENT;
        self.list.swap_remove(at);
        if let Some(&(mc, ms)) = self.list.get(at) {
            self.pos[mc * n + ms] = at;
        }

        let staff = &mut self.slot_staff[slot];
        if let Some(i) = staff.iter().position(|&x| x == c) {
            staff.swap_remove(i);
        }
        if staff.is_empty() {
            self.viol.uncovered += 1;
        }

        let site = self.p.site_of(slot);
        let d = self.p.day_of(slot);
        let k = c * self.p.n_days + d;
        let before_paid = self.paid_day(k);
        let before_len = self.day_slots[k].len();
        if let Some(i) = self.day_slots[k].iter().position(|&x| x == slot) {
            self.day_slots[k].swap_remove(i);
        }
        self.day_gross[k] -= self.p.gross[slot];
        self.day_long[k] -= u32::from(self.p.long[slot]);
        self.update_day(c, k, before_paid, before_len);

        let sk = c * self.p.n_sites + site;
        self.site_count[sk] -= 1;
        if self.site_count[sk] == 0 {
            self.tally.sites_used -= 1;
            self.sites_of[c] -= 1;
        }
        if self.p.pref_hit[sk] {
            self.tally.preference_hits -= 1;
        }
        if self.p.female[c] && self.p.kindergarten[site] {
            self.female_at[site] -= 1;
            if self.female_at[site] == 0 {
                self.viol.kindergartens_without_female += 1;
            }
        }
        true
    }

    pub fn breakdown(&self) -> ObjectiveBreakdown {
        breakdown_from_tally(self.p.inst, &self.p.den, &self.tally)
    }

    pub fn objective(&self) -> f64 {
        self.breakdown().total
    }

    /// Objective plus the penalty weight times the number of violations.
    ///
    /// Minutes above a weekly cap add a graded share of one more penalty
    /// unit, so the search can tell a small overrun from a large one. The
    /// term is zero for every feasible state.
    pub fn energy(&self) -> f64 {
        let graded = self.excess_minutes as f64 / self.p.max_cap as f64;
        self.objective() + self.p.penalty * (f64::from(self.viol.total()) + graded)
    }

    pub fn is_feasible(&self) -> bool {
        self.viol.total() == 0
    }

    pub fn assignments(&self) -> impl Iterator<Item = (CollabIdx, usize)> + '_ {
        self.list.iter().copied()
    }

    pub fn to_schedule(&self) -> Schedule {
        self.list
            .iter()
            .map(|&(c, s)| Assignment::new(c, self.p.slots[s]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::{verify, ViolationKind};
    use crate::instances::build_real_case;
    use crate::objective::total_objective;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn incremental_matches_pure_functions() {
        let inst = build_real_case();
        let p = Problem::new(&inst);
        let mut st = SearchState::new(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for step in 0..3000 {
            let c = rng.gen_range(0..p.n_collab);
            let slot = rng.gen_range(0..p.n_slots());
            if !st.add(c, slot) {
                st.remove(c, slot);
            }
            if step % 97 == 0 {
                let sch = st.to_schedule();
                let pure = total_objective(&sch, &inst);
                assert_eq!(st.breakdown(), pure);
                let report = verify(&sch, &inst);
                // the search state never leaves the candidate domain itself,
                // but random (c, slot) pairs above may
                let domain = report.count(ViolationKind::CandidateDomain) as u32;
                assert_eq!(st.viol.total(), report.len() as u32 - domain);
                assert_eq!(st.viol.uncovered as usize, report.count(ViolationKind::Coverage));
                assert_eq!(st.viol.over_cap as usize, report.count(ViolationKind::WeeklyLimit));
            }
        }
    }

    #[test]
    fn add_remove_roundtrip_restores_state() {
        let inst = build_real_case();
        let p = Problem::new(&inst);
        let mut st = SearchState::new(&p);
        let e0 = st.energy();
        assert!(st.add(0, 0));
        assert!(!st.add(0, 0));
        assert!(st.remove(0, 0));
        assert!(!st.remove(0, 0));
        assert_eq!(st.energy(), e0);
        assert_eq!(st.viol.uncovered, 90);
    }
}
