//! Depth-first branch and bound in two phases.
//!
//! The first phase fixes, collaborator by collaborator, the set of sites
//! each one may work at, charged `w1 / Dm` per site up front. The second
//! phase decides every (collaborator, day) as "idle" or one slot inside that
//! set which still fits the weekly cap, so one shift per day and the cap hold
//! by construction. Collaborators are visited most constrained first (fewest
//! candidate sites), days in calendar order. A schedule is found in the
//! branch whose site sets equal the sites it uses, where the charge is exact.
//!
//! The bound at a node is the decided part plus, for every day, a min-cost
//! assignment of that day's uncovered slots to distinct collaborators whose
//! day is still open. Weekly caps enter through Lagrange multipliers, tuned
//! by subgradient ascent; any nonnegative multipliers give a valid bound.
//! A collaborator whose site set is still open pays `w1 / (Dm · K)` per
//! worked day, `K` being the most days the cap lets them work.
//!
//! Interchangeable collaborators (same gender, cap, domain and preference
//! row) are forced into lexicographic order of their site sets and weeks.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::anneal::{simulated_anneal, SaParams};
use super::greedy::construct;
use super::state::{Problem, SearchState};
use super::{Clock, SolveResult};
use crate::model::{candidate_sites, CollabIdx, Instance};
use crate::objective::Schedule;

const INF: f64 = 1e18;
const PRUNE_EPS: f64 = 1e-10;
const LATTICE_EPS: f64 = 1e-7;
/// Annealing runs used for the initial incumbent.
const WARM_START_RUNS: u64 = 8;
const LEAF_COVERAGE_ROUNDS: usize = 300;
const NODE_COVERAGE_ROUNDS: usize = 15;
/// Stale subgradient rounds before the step is halved.
const COVERAGE_PATIENCE: usize = 10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchBoundStats {
    pub nodes: u64,
    pub pruned: u64,
    pub improvements: u32,
    pub completed: bool,
}

/// Rectangular assignment (rows ≤ cols), minimum total cost.
struct Hungarian {
    u: Vec<f64>,
    v: Vec<f64>,
    p: Vec<usize>,
    way: Vec<usize>,
    minv: Vec<f64>,
    used: Vec<bool>,
}

impl Hungarian {
    fn new() -> Self {
        Self {
            u: Vec::new(),
            v: Vec::new(),
            p: Vec::new(),
            way: Vec::new(),
            minv: Vec::new(),
            used: Vec::new(),
        }
    }

    /// `cost[i * m + j]`; returns `None` if every assignment hits `INF`.
    fn solve(&mut self, n: usize, m: usize, cost: &[f64]) -> Option<f64> {
        if n == 0 {
            return Some(0.0);
        }
        if n > m {
            return None;
        }
        self.u.clear();
        self.u.resize(n + 1, 0.0);
        self.v.clear();
        self.v.resize(m + 1, 0.0);
        self.p.clear();
        self.p.resize(m + 1, 0);
        self.way.clear();
        self.way.resize(m + 1, 0);
        for i in 1..=n {
            self.p[0] = i;
            let mut j0 = 0;
            self.minv.clear();
            self.minv.resize(m + 1, f64::INFINITY);
            self.used.clear();
            self.used.resize(m + 1, false);
            loop {
                self.used[j0] = true;
                let i0 = self.p[j0];
                let mut delta = f64::INFINITY;
                let mut j1 = 0;
                for j in 1..=m {
                    if self.used[j] {
                        continue;
                    }
                    let cur = cost[(i0 - 1) * m + (j - 1)] - self.u[i0] - self.v[j];
                    if cur < self.minv[j] {
                        self.minv[j] = cur;
                        self.way[j] = j0;
                    }
                    if self.minv[j] < delta {
                        delta = self.minv[j];
                        j1 = j;
                    }
                }
                for j in 0..=m {
                    if self.used[j] {
                        self.u[self.p[j]] += delta;
                        self.v[j] -= delta;
                    } else {
                        self.minv[j] -= delta;
                    }
                }
                j0 = j1;
                if self.p[j0] == 0 {
                    break;
                }
            }
            loop {
                let j1 = self.way[j0];
                self.p[j0] = self.p[j1];
                j0 = j1;
                if j0 == 0 {
                    break;
                }
            }
        }
        let mut total = 0.0;
        for j in 1..=m {
            if self.p[j] != 0 {
                let c = cost[(self.p[j] - 1) * m + (j - 1)];
                if c >= INF / 2.0 {
                    return None;
                }
                total += c;
            }
        }
        Some(total)
    }
}

/// Position in the site-set enumeration: sizes 1, 2, ... then the empty set.
type SetKey = (usize, Vec<usize>);

fn set_key(set: &[usize], max_size: usize) -> SetKey {
    let size = if set.is_empty() { max_size + 1 } else { set.len() };
    (size, set.to_vec())
}

struct Search<'p, 'a, 'c> {
    p: &'p Problem<'a>,
    st: SearchState<'p, 'a>,
    clock: &'c dyn Clock,
    t0: f64,
    limit: f64,
    order: Vec<CollabIdx>,
    rank: Vec<usize>,
    /// Position of the previous interchangeable collaborator, if any.
    twin_of: Vec<Option<usize>>,
    domain: Vec<Vec<usize>>,
    /// Most days each collaborator can work within the cap.
    max_days: Vec<usize>,
    /// Chosen site set per collaborator, `None` while open.
    set_of: Vec<Option<Vec<usize>>>,
    /// `[c * n_sites + s]` → `s` is inside `c`'s set (or domain while open).
    allowed: Vec<bool>,
    charged_sites: usize,
    /// `[c * nd + d]` → 0 for idle, slot + 1 otherwise.
    choice: Vec<usize>,
    unit: [f64; 3],
    best: f64,
    best_schedule: Option<Schedule>,
    stats: BranchBoundStats,
    timed_out: bool,
    hungarian: Hungarian,
    cost: Vec<f64>,
    rows: Vec<CollabIdx>,
    base: Vec<f64>,
    base_slot: Vec<usize>,
    /// Multipliers of the relaxed weekly caps, per collaborator.
    lambda: Vec<f64>,
    relaxed_paid: Vec<i64>,
    /// Prices of uncovered slots for the coverage bound.
    mu: Vec<f64>,
}

impl<'p, 'a, 'c> Search<'p, 'a, 'c> {
    fn nd(&self) -> usize {
        self.p.n_days
    }

    fn n(&self) -> usize {
        self.order.len()
    }

    fn fits(&self, c: CollabIdx, slot: usize) -> bool {
        self.st.paid_week[c] + i64::from(self.p.paid[slot]) <= self.p.cap[c]
    }

    fn usable(&self, c: CollabIdx, slot: usize) -> bool {
        self.allowed[c * self.p.n_sites + self.p.site_of(slot)] && self.fits(c, slot)
    }

    /// Marginal cost of `c` taking `slot` in the relaxation.
    fn kappa(&self, c: CollabIdx, slot: usize) -> f64 {
        let p = self.p;
        let site = p.site_of(slot);
        let mut k = -(self.unit[1] - self.lambda[c]) * f64::from(p.paid[slot]);
        if self.set_of[c].is_none() {
            k += self.unit[0] / self.max_days[c].max(1) as f64;
        }
        if p.pref_hit[c * p.n_sites + site] {
            k += self.unit[2];
        }
        k
    }

    /// Whether day `d` of `c` is still open at day-phase index `k`.
    fn is_open(&self, c: CollabIdx, d: usize, k: usize) -> bool {
        self.rank[c] * self.nd() + d >= k
    }

    /// Relaxation value at day-phase index `k` (0 during the site phase),
    /// or `None` if the relaxation is infeasible. Fills `relaxed_paid`.
    fn lower_bound(&mut self, k: usize) -> Option<f64> {
        let p = self.p;
        let nd = self.nd();
        let mut lb = self.st.objective()
            + self.unit[0] * (self.charged_sites as f64 - self.st.tally.sites_used as f64);
        self.relaxed_paid.iter_mut().for_each(|t| *t = 0);

        for site in 0..p.n_sites {
            if !p.kindergarten[site] || self.st.female_at(site) > 0 {
                continue;
            }
            let reachable = (0..p.n_collab).any(|c| {
                p.female[c]
                    && (0..nd).any(|d| {
                        self.is_open(c, d, k)
                            && p.options(c, d)
                                .iter()
                                .any(|&s| p.site_of(s) == site && self.usable(c, s))
                    })
            });
            if !reachable {
                return None;
            }
        }

        for c in 0..p.n_collab {
            if self.is_open(c, nd - 1, k) {
                lb -= self.lambda[c] * (p.cap[c] - self.st.paid_week[c]) as f64;
            }
        }

        let mut uncovered = Vec::new();
        for d in 0..nd {
            self.rows.clear();
            self.base.clear();
            self.base_slot.clear();
            for pos in 0..self.n() {
                let c = self.order[pos];
                if !self.is_open(c, d, k) {
                    continue;
                }
                let mut b = 0.0f64;
                let mut bs = usize::MAX;
                for &s in p.options(c, d) {
                    if self.usable(c, s) {
                        let v = self.kappa(c, s);
                        if v < b {
                            b = v;
                            bs = s;
                        }
                    }
                }
                self.rows.push(c);
                self.base.push(b);
                self.base_slot.push(bs);
                lb += b;
            }
            uncovered.clear();
            uncovered.extend(
                p.slots_by_day[d]
                    .iter()
                    .copied()
                    .filter(|&s| self.st.coverage(s) == 0),
            );
            let m = self.rows.len();
            if uncovered.len() > m {
                return None;
            }
            self.cost.clear();
            self.cost.resize(uncovered.len() * m, INF);
            for (j, &c) in self.rows.iter().enumerate() {
                for (i, &s) in uncovered.iter().enumerate() {
                    if self.allowed[c * p.n_sites + p.site_of(s)]
                        && p.eligible[s].binary_search(&c).is_ok()
                        && self.fits(c, s)
                    {
                        self.cost[i * m + j] = self.kappa(c, s) - self.base[j];
                    }
                }
            }
            let cost = core::mem::take(&mut self.cost);
            let r = self.hungarian.solve(uncovered.len(), m, &cost);
            self.cost = cost;
            lb += r?;
            for (j, &c) in self.rows.iter().enumerate() {
                let row = if uncovered.is_empty() {
                    0
                } else {
                    self.hungarian.p[j + 1]
                };
                let slot = if row > 0 {
                    uncovered[row - 1]
                } else {
                    self.base_slot[j]
                };
                if slot != usize::MAX {
                    self.relaxed_paid[c] += i64::from(p.paid[slot]);
                }
            }
        }
        Some(lb)
    }

    /// Subgradient ascent on the cap multipliers; keeps the best found.
    fn tune_multipliers(&mut self, k: usize, rounds: usize) -> Option<f64> {
        let n = self.p.n_collab;
        let nd = self.nd();
        let mut best_lb = f64::NEG_INFINITY;
        let mut best_lambda = self.lambda.clone();
        let mut theta = 1.0;
        let mut stale = 0;
        for _ in 0..rounds {
            let lb = self.lower_bound(k)?;
            if lb > best_lb + 1e-12 {
                best_lb = lb;
                best_lambda.clone_from(&self.lambda);
                stale = 0;
            } else {
                stale += 1;
                if stale >= 5 {
                    theta *= 0.5;
                    stale = 0;
                }
            }
            if self.cuts(lb) {
                break;
            }
            let g: Vec<f64> = (0..n)
                .map(|c| {
                    if self.is_open(c, nd - 1, k) {
                        (self.relaxed_paid[c] - (self.p.cap[c] - self.st.paid_week[c])) as f64
                    } else {
                        0.0
                    }
                })
                .collect();
            let norm: f64 = g.iter().map(|x| x * x).sum();
            if norm == 0.0 || theta < 1e-3 {
                break;
            }
            let target = if self.best.is_finite() {
                self.best
            } else {
                lb + libm::fabs(lb) * 0.1 + 1e-3
            };
            let step = theta * (target - lb).max(1e-9) / norm;
            for c in 0..n {
                self.lambda[c] = (self.lambda[c] + step * g[c]).max(0.0);
            }
        }
        self.lambda = best_lambda;
        Some(best_lb)
    }

    /// Best week of `c` over its open days at index `k`, with slot prices
    /// `mu`. Returns the reduced cost and writes the slots into `out`. A
    /// collaborator whose set is still open pays one site charge if it works.
    fn best_week(&self, c: CollabIdx, k: usize, mu: &[f64], out: &mut Vec<usize>) -> f64 {
        let p = self.p;
        // per open day, the cheapest slot for each paid length
        let mut days: Vec<Vec<(usize, i64, f64)>> = Vec::new();
        for d in (0..self.nd()).filter(|&d| self.is_open(c, d, k)) {
            let mut opts: Vec<(usize, i64, f64)> = Vec::new();
            for &slot in p.options(c, d) {
                let site = p.site_of(slot);
                if !self.allowed[c * p.n_sites + site] {
                    continue;
                }
                let q = i64::from(p.paid[slot]);
                let price = if self.st.coverage(slot) == 0 { mu[slot] } else { 0.0 };
                let mut v = -self.unit[1] * q as f64 - price;
                if p.pref_hit[c * p.n_sites + site] {
                    v += self.unit[2];
                }
                match opts.iter_mut().find(|o| o.1 == q) {
                    Some(o) if o.2 <= v => {}
                    Some(o) => *o = (slot, q, v),
                    None => opts.push((slot, q, v)),
                }
            }
            if !opts.is_empty() {
                days.push(opts);
            }
        }
        fn rec(
            days: &[Vec<(usize, i64, f64)>],
            i: usize,
            left: i64,
            acc: f64,
            cur: &mut Vec<usize>,
            best: &mut (f64, Vec<usize>),
        ) {
            if i == days.len() {
                if acc < best.0 {
                    best.0 = acc;
                    best.1.clone_from(cur);
                }
                return;
            }
            rec(days, i + 1, left, acc, cur, best);
            for &(slot, q, v) in &days[i] {
                if q <= left {
                    cur.push(slot);
                    rec(days, i + 1, left - q, acc + v, cur, best);
                    cur.pop();
                }
            }
        }
        let charge = if self.set_of[c].is_none() { self.unit[0] } else { 0.0 };
        let mut best = (f64::INFINITY, Vec::new());
        let mut cur = Vec::new();
        rec(&days, 0, self.p.cap[c] - self.st.paid_week[c], charge, &mut cur, &mut best);
        if best.0 >= 0.0 || best.1.is_empty() {
            out.clear();
            return 0.0;
        }
        out.clone_from(&best.1);
        best.0
    }

    /// Bound with coverage priced by `mu` and every week solved exactly.
    fn coverage_bound(&self, k: usize, mu: &[f64], weeks: &mut Vec<Vec<usize>>) -> f64 {
        let p = self.p;
        let mut lb = self.st.objective()
            + self.unit[0] * (self.charged_sites as f64 - self.st.tally.sites_used as f64);
        for s in 0..p.n_slots() {
            if self.st.coverage(s) == 0 {
                lb += mu[s];
            }
        }
        weeks.resize(p.n_collab, Vec::new());
        for c in 0..p.n_collab {
            let mut w = Vec::new();
            lb += self.best_week(c, k, mu, &mut w);
            weeks[c] = w;
        }
        lb
    }

    fn tune_coverage(&self, k: usize, mu: &mut Vec<f64>, rounds: usize) -> f64 {
        let p = self.p;
        let mut weeks = Vec::new();
        let mut best_lb = f64::NEG_INFINITY;
        let mut best_mu = mu.clone();
        let mut theta = 2.0;
        let mut stale = 0;
        for _ in 0..rounds {
            let lb = self.coverage_bound(k, mu, &mut weeks);
            if lb > best_lb + 1e-12 {
                best_lb = lb;
                best_mu.clone_from(mu);
                stale = 0;
            } else {
                stale += 1;
                if stale >= COVERAGE_PATIENCE {
                    theta *= 0.5;
                    stale = 0;
                }
            }
            if self.cuts(lb) || theta < 1e-4 || self.out_of_time() {
                break;
            }
            let mut g = vec![0.0; p.n_slots()];
            for s in 0..p.n_slots() {
                if self.st.coverage(s) == 0 {
                    g[s] = 1.0;
                }
            }
            for w in &weeks {
                for &s in w {
                    if self.st.coverage(s) == 0 {
                        g[s] -= 1.0;
                    }
                }
            }
            // prices stay nonnegative: drop components that would push below zero
            let norm: f64 = g
                .iter()
                .zip(mu.iter())
                .filter(|(gi, m)| **gi > 0.0 || **m > 0.0)
                .map(|(gi, _)| gi * gi)
                .sum();
            if norm == 0.0 {
                break;
            }
            let target = if self.best.is_finite() { self.best } else { lb + 1e-3 };
            let step = theta * (target - lb).max(1e-9) / norm;
            for s in 0..p.n_slots() {
                mu[s] = (mu[s] + step * g[s]).max(0.0);
            }
        }
        mu.clone_from(&best_mu);
        best_lb
    }

    /// True when no schedule with objective at least `lb` beats the
    /// incumbent. Objective values are integer combinations of the three
    /// unit weights, so `lb` is rounded up to the next reachable value.
    fn cuts(&self, lb: f64) -> bool {
        if lb >= self.best - PRUNE_EPS {
            return true;
        }
        if !self.best.is_finite() {
            return false;
        }
        let [u0, u1, u2] = self.unit;
        let steps = |u: f64| if u > 0.0 { libm::floor(lb.max(0.0) / u) as u64 + 1 } else { 0 };
        let mut next = f64::INFINITY;
        for a in 0..=steps(u0) {
            for h in 0..=steps(u2) {
                let base = a as f64 * u0 + h as f64 * u2;
                let r = lb - base;
                let v = if r <= LATTICE_EPS {
                    base
                } else if u1 > 0.0 {
                    base + libm::ceil(r / u1 - LATTICE_EPS) * u1
                } else {
                    continue;
                };
                next = next.min(v);
                if r <= LATTICE_EPS {
                    break;
                }
            }
        }
        next >= self.best - PRUNE_EPS
    }

    fn out_of_time(&self) -> bool {
        self.clock.now_seconds() - self.t0 >= self.limit
    }

    fn tick(&mut self) -> bool {
        self.stats.nodes += 1;
        if !self.timed_out && self.out_of_time() {
            self.timed_out = true;
        }
        self.timed_out
    }

    fn set_allowed(&mut self, c: CollabIdx, sites: &[usize]) {
        let ns = self.p.n_sites;
        self.allowed[c * ns..(c + 1) * ns]
            .iter_mut()
            .for_each(|a| *a = false);
        for &s in sites {
            self.allowed[c * ns + s] = true;
        }
    }

    fn max_set_size(&self, c: CollabIdx) -> usize {
        self.domain[c].len().min(self.nd())
    }

    fn dfs_sites(&mut self, pos: usize) {
        if self.tick() {
            return;
        }
        if pos == self.n() {
            let saved = self.lambda.clone();
            let mut mu = self.mu.clone();
            let cb = self.tune_coverage(0, &mut mu, LEAF_COVERAGE_ROUNDS);
            let t = if !self.cuts(cb) {
                self.tune_multipliers(0, 20)
            } else {
                None
            };
            if t.is_some_and(|v| !self.cuts(v)) {
                let parent_mu = core::mem::replace(&mut self.mu, mu);
                self.dfs_days(0);
                self.mu = parent_mu;
            } else {
                self.stats.pruned += 1;
            }
            self.lambda = saved;
            return;
        }
        match self.lower_bound(0) {
            Some(lb) if !self.cuts(lb) => {}
            _ => {
                self.stats.pruned += 1;
                return;
            }
        }
        let mut mu = self.mu.clone();
        let rounds = if pos == 0 { LEAF_COVERAGE_ROUNDS } else { NODE_COVERAGE_ROUNDS };
        if self.cuts(self.tune_coverage(0, &mut mu, rounds)) {
            self.stats.pruned += 1;
            return;
        }
        let parent_mu = core::mem::replace(&mut self.mu, mu);
        self.branch_sites(pos);
        self.mu = parent_mu;
    }

    fn branch_sites(&mut self, pos: usize) {
        let c = self.order[pos];
        let max_size = self.max_set_size(c);
        let floor: Option<SetKey> = self.twin_of[pos].map(|q| {
            let qc = self.order[q];
            set_key(self.set_of[qc].as_deref().unwrap_or(&[]), max_size)
        });

        // free sites for c, no charge: every child costs at least this
        // plus its own charge
        let domain = self.domain[c].clone();
        self.set_of[c] = Some(domain.clone());
        let free = self.lower_bound(0);
        self.set_of[c] = None;
        let Some(free) = free else {
            self.stats.pruned += 1;
            return;
        };

        let sizes = (1..=max_size).chain(core::iter::once(0));
        for size in sizes {
            if self.cuts(free + self.unit[0] * size as f64) {
                continue;
            }
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                let set: Vec<usize> = idx.iter().map(|&i| domain[i]).collect();
                let admissible = floor
                    .as_ref()
                    .map_or(true, |f| set_key(&set, max_size) >= *f);
                if admissible {
                    self.set_allowed(c, &set);
                    self.charged_sites += size;
                    self.set_of[c] = Some(set);
                    self.dfs_sites(pos + 1);
                    self.set_of[c] = None;
                    self.charged_sites -= size;
                    if self.timed_out {
                        self.set_allowed(c, &domain);
                        return;
                    }
                }
                // next combination of `size` out of the domain
                let mut i = size;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    if idx[i] < domain.len() - size + i {
                        idx[i] += 1;
                        for j in i + 1..size {
                            idx[j] = idx[j - 1] + 1;
                        }
                        i = usize::MAX;
                        break;
                    }
                }
                if i != usize::MAX {
                    break;
                }
            }
        }
        self.set_allowed(c, &domain);
    }

    fn dfs_days(&mut self, k: usize) {
        if self.tick() {
            return;
        }
        let p = self.p;
        let nd = self.nd();
        if k == self.n() * nd {
            if self.st.is_feasible() {
                let obj = self.st.objective();
                if obj < self.best - PRUNE_EPS {
                    self.best = obj;
                    self.best_schedule = Some(self.st.to_schedule());
                    self.stats.improvements += 1;
                }
            }
            return;
        }
        match self.lower_bound(k) {
            Some(lb) if !self.cuts(lb) => {}
            _ => {
                self.stats.pruned += 1;
                return;
            }
        }
        if k > 0 {
            let mut mu = self.mu.clone();
            if self.cuts(self.tune_coverage(k, &mut mu, NODE_COVERAGE_ROUNDS)) {
                self.stats.pruned += 1;
                return;
            }
        }

        let pos = k / nd;
        let d = k % nd;
        let c = self.order[pos];
        // lexicographic floor from an interchangeable predecessor with the same set
        let floor = match self.twin_of[pos] {
            Some(q) => {
                let qc = self.order[q];
                let tied = self.set_of[qc] == self.set_of[c]
                    && (0..d).all(|e| self.choice[c * nd + e] == self.choice[qc * nd + e]);
                if tied {
                    self.choice[qc * nd + d]
                } else {
                    0
                }
            }
            None => 0,
        };

        let mut children: Vec<(bool, f64, usize)> = Vec::new();
        for &s in p.options(c, d) {
            if s + 1 < floor || !self.usable(c, s) {
                continue;
            }
            let covers = self.st.coverage(s) == 0;
            children.push((!covers, self.kappa(c, s), s + 1));
        }
        if floor == 0 {
            children.push((true, 0.0, 0));
        }
        children.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal))
                .then(a.2.cmp(&b.2))
        });

        for (_, _, code) in children {
            self.choice[c * nd + d] = code;
            if code == 0 {
                self.dfs_days(k + 1);
            } else {
                self.st.add(c, code - 1);
                self.dfs_days(k + 1);
                self.st.remove(c, code - 1);
            }
            if self.timed_out {
                break;
            }
        }
        self.choice[c * nd + d] = 0;
    }
}

fn interchangeable(p: &Problem<'_>, a: CollabIdx, b: CollabIdx) -> bool {
    let inst = p.inst;
    let (ca, cb) = (&inst.collaborators[a], &inst.collaborators[b]);
    let ns = p.n_sites;
    ca.gender == cb.gender
        && p.cap[a] == p.cap[b]
        && candidate_sites(a, inst) == candidate_sites(b, inst)
        && p.pref_hit[a * ns..(a + 1) * ns] == p.pref_hit[b * ns..(b + 1) * ns]
}

/// Most days `c` can work: cheapest option per day, smallest first, within the cap.
fn max_days(p: &Problem<'_>, c: CollabIdx) -> usize {
    let mut cheapest: Vec<i64> = (0..p.n_days)
        .filter_map(|d| p.options(c, d).iter().map(|&s| i64::from(p.paid[s])).min())
        .collect();
    cheapest.sort_unstable();
    let mut total = 0;
    let mut days = 0;
    for q in cheapest {
        total += q;
        if total > p.cap[c] {
            break;
        }
        days += 1;
    }
    days
}

/// Exact search with the greedy/annealing incumbent. `proven_optimal` is
/// set iff the search finished within `time_limit_s`.
pub fn exact_branch_bound(inst: &Instance, time_limit_s: f64, clock: &dyn Clock) -> SolveResult {
    exact_branch_bound_from(inst, time_limit_s, None, clock).0
}

/// As [`exact_branch_bound`], optionally seeded with a known schedule.
pub fn exact_branch_bound_from(
    inst: &Instance,
    time_limit_s: f64,
    warm_start: Option<&Schedule>,
    clock: &dyn Clock,
) -> (SolveResult, BranchBoundStats) {
    let t0 = clock.now_seconds();
    let p = Problem::new(inst);

    let greedy = construct(&p, 0);
    let mut incumbent = (greedy.is_feasible(), greedy.objective(), greedy.to_schedule());
    let mut consider = |sch: Schedule| {
        let st = SearchState::from_schedule(&p, &sch);
        let cand = (st.is_feasible(), st.objective());
        let better = match (cand.0, incumbent.0) {
            (true, false) => true,
            (false, true) => false,
            _ => cand.1 < incumbent.1,
        };
        if better {
            incumbent = (cand.0, cand.1, st.to_schedule());
        }
    };
    if let Some(w) = warm_start {
        consider(w.clone());
    }
    if time_limit_s <= 0.0 {
        let (_, _, sch) = incumbent;
        let r = SolveResult::finish(inst, sch, clock.now_seconds() - t0, false, 0);
        return (r, BranchBoundStats::default());
    }
    if warm_start.is_none() {
        // effort grows with the number of (collaborator, slot) pairs
        let steps = (p.n_collab * p.n_slots()).clamp(50, 2000) as u32;
        let budget = libm::fmin(5.0, time_limit_s * 0.1);
        for seed in 0..WARM_START_RUNS {
            // the short default schedule always finishes cooling; the longer
            // one may be cut off by the budget on large instances
            for steps_per_temperature in [SaParams::default().steps_per_temperature, steps] {
                let params = SaParams {
                    steps_per_temperature,
                    time_limit_seconds: budget,
                    ..SaParams::with_seed(seed)
                };
                consider(simulated_anneal(inst, &params, clock).schedule);
            }
        }
    }

    let domain: Vec<Vec<usize>> = (0..p.n_collab)
        .map(|c| candidate_sites(c, inst).into_iter().collect())
        .collect();
    let mut order: Vec<CollabIdx> = (0..p.n_collab).collect();
    order.sort_by_key(|&c| (domain[c].len(), c));
    // group interchangeable collaborators next to each other
    let mut grouped: Vec<CollabIdx> = Vec::with_capacity(order.len());
    let mut taken = vec![false; p.n_collab];
    for i in 0..order.len() {
        if taken[order[i]] {
            continue;
        }
        for j in i..order.len() {
            let (a, b) = (order[i], order[j]);
            if !taken[b] && interchangeable(&p, a, b) {
                taken[b] = true;
                grouped.push(b);
            }
        }
    }
    let order = grouped;
    let mut rank = vec![0; p.n_collab];
    for (pos, &c) in order.iter().enumerate() {
        rank[c] = pos;
    }
    let twin_of = (0..order.len())
        .map(|pos| (pos > 0 && interchangeable(&p, order[pos - 1], order[pos])).then(|| pos - 1))
        .collect();
    let mut allowed = vec![false; p.n_collab * p.n_sites];
    for c in 0..p.n_collab {
        for &s in &domain[c] {
            allowed[c * p.n_sites + s] = true;
        }
    }

    let w = inst.effective_weights().0;
    let per = |wi: f64, den: f64| if den > 0.0 { wi / den } else { 0.0 };
    let unit = [
        per(w[0], p.den.multi_site),
        per(w[1], p.den.hours),
        per(w[2], p.den.preference),
    ];

    let (inc_feasible, inc_obj, inc_sch) = incumbent;
    let mut search = Search {
        p: &p,
        st: SearchState::new(&p),
        clock,
        t0,
        limit: time_limit_s,
        order,
        rank,
        twin_of,
        max_days: (0..p.n_collab).map(|c| max_days(&p, c)).collect(),
        domain,
        set_of: vec![None; p.n_collab],
        allowed,
        charged_sites: 0,
        choice: vec![0; p.n_collab * p.n_days],
        unit,
        best: if inc_feasible { inc_obj } else { f64::INFINITY },
        best_schedule: None,
        stats: BranchBoundStats::default(),
        timed_out: false,
        hungarian: Hungarian::new(),
        cost: Vec::new(),
        rows: Vec::new(),
        base: Vec::new(),
        base_slot: Vec::new(),
        lambda: vec![0.0; p.n_collab],
        relaxed_paid: vec![0; p.n_collab],
        mu: vec![0.0; p.n_slots()],
    };
    if search.tune_multipliers(0, 300).is_some() {
        search.dfs_sites(0);
    }
    let completed = !search.timed_out;
    let mut stats = search.stats;
    stats.completed = completed;
    let schedule = search.best_schedule.take().unwrap_or(inc_sch);
    let mut r = SolveResult::finish(inst, schedule, clock.now_seconds() - t0, false, stats.nodes);
    r.proven_optimal = completed && r.feasible;
    (r, stats)
}
