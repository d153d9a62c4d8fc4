//! Domain types for the weekly multi-site rostering problem.
//!
//! An [`Instance`] is immutable once built. Collaborators refer to sites by
//! index into [`Instance::sites`]; string identifiers only matter at the file
//! boundary.

mod time;
mod validate;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

pub use time::{parse_time, shift_duration, ShiftSpec, TimeError, TimeOfDay, MINUTES_PER_DAY};
pub use validate::{validate_instance, Defect};

pub type SiteIdx = usize;
pub type CollabIdx = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    Kindergarten,
    Primary,
    Secondary,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Kindergarten, Level::Primary, Level::Secondary];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Kindergarten => "Kindergarten",
            Level::Primary => "Primary",
            Level::Secondary => "Secondary",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub id: String,
    pub city: String,
    pub level: Level,
}

impl Site {
    pub fn new(id: impl Into<String>, city: impl Into<String>, level: Level) -> Self {
        Self {
            id: id.into(),
            city: city.into(),
            level,
        }
    }

    pub fn is_kindergarten(&self) -> bool {
        self.level == Level::Kindergarten
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    Female,
    Male,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Contract {
    FullTime,
    PartTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collaborator {
    pub id: String,
    pub gender: Gender,
    pub contract: Contract,
    /// Hard restriction: when non-empty, the only assignable sites.
    pub binding_sites: BTreeSet<SiteIdx>,
    /// Soft preference, only consulted when `binding_sites` is empty.
    pub preferred_sites: BTreeSet<SiteIdx>,
}

impl Collaborator {
    pub fn new(id: impl Into<String>, gender: Gender, contract: Contract) -> Self {
        Self {
            id: id.into(),
            gender,
            contract,
            binding_sites: BTreeSet::new(),
            preferred_sites: BTreeSet::new(),
        }
    }

    pub fn bound_to(mut self, sites: impl IntoIterator<Item = SiteIdx>) -> Self {
        self.binding_sites.extend(sites);
        self
    }

    pub fn preferring(mut self, sites: impl IntoIterator<Item = SiteIdx>) -> Self {
        self.preferred_sites.extend(sites);
        self
    }

    pub fn is_female(&self) -> bool {
        self.gender == Gender::Female
    }
}

/// Contract and break parameters, all in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub h_ft_minutes: u32,
    pub h_pt_minutes: u32,
    /// Shifts strictly longer than this carry a break.
    pub break_threshold_minutes: u32,
    pub break_minutes: u32,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            h_ft_minutes: 36 * 60,
            h_pt_minutes: 18 * 60,
            break_threshold_minutes: 432,
            break_minutes: 30,
        }
    }
}

impl Params {
    pub fn weekly_cap(&self, contract: Contract) -> u32 {
        match contract {
            Contract::FullTime => self.h_ft_minutes,
            Contract::PartTime => self.h_pt_minutes,
        }
    }

    /// True when a shift of this length triggers the mandatory break.
    pub fn needs_break(&self, duration_minutes: u32) -> bool {
        duration_minutes > self.break_threshold_minutes
    }

    /// Paid minutes of a single shift once the break is taken out.
    pub fn paid_minutes(&self, duration_minutes: u32) -> u32 {
        if self.needs_break(duration_minutes) {
            duration_minutes.saturating_sub(self.break_minutes)
        } else {
            duration_minutes
        }
    }
}

/// Raw objective weights for (multi-site, hours deviation, preference).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights(pub [f64; 3]);

impl Default for Weights {
    fn default() -> Self {
        Weights([0.5, 0.3, 0.2])
    }
}

impl Weights {
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|w| w.is_finite() && *w >= 0.0) && self.sum() > 0.0
    }

    /// Scales to a convex combination. Invalid weights are returned unchanged.
    pub fn normalized(&self) -> Weights {
        let s = self.sum();
        if !self.is_valid() {
            return *self;
        }
        Weights([self.0[0] / s, self.0[1] / s, self.0[2] / s])
    }
}

/// Which collaborators' assignments the preference term may penalize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PreferenceScope {
    /// Collaborators with neither preferences nor binding sites are never
    /// penalized; bound collaborators count their binding sites as preferred.
    #[default]
    DeclaredOnly,
    /// Undeclared collaborators are penalized for every assignment; bound
    /// collaborators still count their binding sites as preferred.
    PenalizeUndeclared,
    /// Only explicitly declared preferences exempt an assignment. Bound
    /// collaborators without declared preferences are penalized too.
    Literal,
}

/// Normalizer of the preference term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PreferenceDenominator {
    /// |C|·|S|·|D|·|J|
    #[default]
    CollabSiteDayShift,
    /// |C|·|D|·|J|
    CollabDayShift,
}

/// Switches between the readings of the objective that the data supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Interpretation {
    pub preference_scope: PreferenceScope,
    pub preference_denominator: PreferenceDenominator,
    /// Use the weights as given instead of normalizing them to sum 1.
    pub raw_weights: bool,
}

/// Weekly opening windows, dense over (site, day, shift).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timetable {
    n_days: usize,
    n_shifts: usize,
    cells: Vec<Option<ShiftSpec>>,
}

impl Timetable {
    pub fn empty(n_sites: usize, n_days: usize, n_shifts: usize) -> Self {
        Self {
            n_days,
            n_shifts,
            cells: vec![None; n_sites * n_days * n_shifts],
        }
    }

    pub fn n_sites(&self) -> usize {
        if self.n_days == 0 || self.n_shifts == 0 {
            0
        } else {
            self.cells.len() / (self.n_days * self.n_shifts)
        }
    }

    pub fn n_days(&self) -> usize {
        self.n_days
    }

    pub fn n_shifts(&self) -> usize {
        self.n_shifts
    }

    fn index(&self, site: SiteIdx, day: usize, shift: usize) -> Option<usize> {
        (site < self.n_sites() && day < self.n_days && shift < self.n_shifts)
            .then(|| (site * self.n_days + day) * self.n_shifts + shift)
    }

    pub fn get(&self, site: SiteIdx, day: usize, shift: usize) -> Option<&ShiftSpec> {
        self.index(site, day, shift).and_then(|i| self.cells[i].as_ref())
    }

    /// Sets a cell; out-of-range coordinates are ignored and reported as `false`.
    pub fn set(&mut self, site: SiteIdx, day: usize, shift: usize, spec: Option<ShiftSpec>) -> bool {
        match self.index(site, day, shift) {
            Some(i) => {
                self.cells[i] = spec;
                true
            }
            None => false,
        }
    }

    pub fn duration(&self, slot: Slot) -> Option<u32> {
        self.get(slot.site, slot.day, slot.shift).map(ShiftSpec::duration_minutes)
    }
}

/// A (site, day, shift) coordinate. Active when the timetable has a window for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub site: SiteIdx,
    pub day: usize,
    pub shift: usize,
}

impl Slot {
    pub const fn new(site: SiteIdx, day: usize, shift: usize) -> Self {
        Self { site, day, shift }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub sites: Vec<Site>,
    pub collaborators: Vec<Collaborator>,
    pub days: Vec<String>,
    pub shifts: Vec<String>,
    pub timetable: Timetable,
    pub params: Params,
    pub weights: Weights,
    #[serde(default)]
    pub interpretation: Interpretation,
}

pub const DEFAULT_DAYS: [&str; 5] = ["Mon", "Tue", "Wed", "Thu", "Fri"];
pub const DEFAULT_SHIFTS: [&str; 2] = ["T1", "T2"];

impl Instance {
    /// An instance with the default Mon–Fri calendar, two shifts, and an
    /// empty timetable sized for `sites`.
    pub fn with_defaults(sites: Vec<Site>, collaborators: Vec<Collaborator>) -> Self {
        let days: Vec<String> = DEFAULT_DAYS.iter().map(|d| String::from(*d)).collect();
        let shifts: Vec<String> = DEFAULT_SHIFTS.iter().map(|s| String::from(*s)).collect();
        let timetable = Timetable::empty(sites.len(), days.len(), shifts.len());
        Self {
            sites,
            collaborators,
            days,
            shifts,
            timetable,
            params: Params::default(),
            weights: Weights::default(),
            interpretation: Interpretation::default(),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn n_collaborators(&self) -> usize {
        self.collaborators.len()
    }

    pub fn n_days(&self) -> usize {
        self.days.len()
    }

    pub fn n_shifts(&self) -> usize {
        self.shifts.len()
    }

    /// Weights as the objective uses them.
    pub fn effective_weights(&self) -> Weights {
        if self.interpretation.raw_weights {
            self.weights
        } else {
            self.weights.normalized()
        }
    }

    pub fn site_index(&self, id: &str) -> Option<SiteIdx> {
        self.sites.iter().position(|s| s.id == id)
    }

    pub fn collaborator_index(&self, id: &str) -> Option<CollabIdx> {
        self.collaborators.iter().position(|c| c.id == id)
    }

    pub fn shift_spec(&self, slot: Slot) -> Option<&ShiftSpec> {
        self.timetable.get(slot.site, slot.day, slot.shift)
    }

    /// Duration in minutes, or `None` for an inactive slot.
    pub fn duration(&self, slot: Slot) -> Option<u32> {
        self.timetable.duration(slot)
    }

    pub fn is_active(&self, slot: Slot) -> bool {
        self.duration(slot).is_some()
    }

    pub fn weekly_cap(&self, c: CollabIdx) -> u32 {
        self.params.weekly_cap(self.collaborators[c].contract)
    }

    /// True when `c` may be assigned to `site` at all.
    pub fn is_candidate(&self, c: CollabIdx, site: SiteIdx) -> bool {
        let collab = &self.collaborators[c];
        site < self.sites.len() && (collab.binding_sites.is_empty() || collab.binding_sites.contains(&site))
    }

    /// True when an assignment of `c` to `site` is charged by the preference term.
    pub fn is_preference_violation(&self, c: CollabIdx, site: SiteIdx) -> bool {
        let collab = &self.collaborators[c];
        if !collab.preferred_sites.is_empty() {
            return !collab.preferred_sites.contains(&site);
        }
        match self.interpretation.preference_scope {
            PreferenceScope::Literal => true,
            PreferenceScope::PenalizeUndeclared => {
                collab.binding_sites.is_empty() || !collab.binding_sites.contains(&site)
            }
            PreferenceScope::DeclaredOnly => {
                !collab.binding_sites.is_empty() && !collab.binding_sites.contains(&site)
            }
        }
    }

    pub fn is_kindergarten(&self, site: SiteIdx) -> bool {
        self.sites[site].is_kindergarten()
    }
}

/// Candidate site domain of a collaborator: the binding sites when there are
/// any, every site otherwise.
pub fn candidate_sites(c: CollabIdx, inst: &Instance) -> BTreeSet<SiteIdx> {
    let bind = &inst.collaborators[c].binding_sites;
    if bind.is_empty() {
        (0..inst.n_sites()).collect()
    } else {
        bind.iter().copied().filter(|&s| s < inst.n_sites()).collect()
    }
}

/// Every active slot, ordered by (site, day, shift).
pub fn active_slots(inst: &Instance) -> Vec<Slot> {
    let mut out = Vec::new();
    for site in 0..inst.n_sites() {
        for day in 0..inst.n_days() {
            for shift in 0..inst.n_shifts() {
                let slot = Slot::new(site, day, shift);
                if inst.is_active(slot) {
                    out.push(slot);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Instance {
        let sites = vec![
            Site::new("a-k", "A", Level::Kindergarten),
            Site::new("a-p", "A", Level::Primary),
        ];
        let collabs = vec![
            Collaborator::new("free", Gender::Female, Contract::FullTime),
            Collaborator::new("bound", Gender::Male, Contract::FullTime).bound_to([1]),
            Collaborator::new("pref", Gender::Male, Contract::PartTime).preferring([0]),
        ];
        let mut inst = Instance::with_defaults(sites, collabs);
        inst.timetable.set(0, 0, 0, Some("07:30-14:42".parse().unwrap()));
        inst
    }

    #[test]
    fn candidate_domain_follows_binding() {
        let inst = toy();
        assert_eq!(candidate_sites(0, &inst), [0, 1].into_iter().collect());
        assert_eq!(candidate_sites(1, &inst), [1].into_iter().collect());
        assert_eq!(candidate_sites(2, &inst), [0, 1].into_iter().collect());
        assert!(!inst.is_candidate(1, 0));
    }

    #[test]
    fn active_slots_single_cell_and_empty() {
        let mut inst = toy();
        assert_eq!(active_slots(&inst), vec![Slot::new(0, 0, 0)]);
        inst.timetable.set(0, 0, 0, None);
        assert!(active_slots(&inst).is_empty());
    }

    #[test]
    fn weights_normalize_to_convex_combination() {
        let w = Weights([10.0, 7.0, 5.0]).normalized();
        assert!((w.0[0] - 10.0 / 22.0).abs() < 1e-15);
        assert!((w.0[1] - 7.0 / 22.0).abs() < 1e-15);
        assert!((w.0[2] - 5.0 / 22.0).abs() < 1e-15);
        assert!((w.sum() - 1.0).abs() < 1e-15);
        assert!(!Weights([0.0, 0.0, 0.0]).is_valid());
        assert!(!Weights([1.0, -1.0, 1.0]).is_valid());
    }

    #[test]
    fn preference_scopes() {
        let mut inst = toy();
        // declared preference always counts
        assert!(inst.is_preference_violation(2, 1));
        assert!(!inst.is_preference_violation(2, 0));
        assert!(!inst.is_preference_violation(0, 1));
        assert!(!inst.is_preference_violation(1, 1));
        inst.interpretation.preference_scope = PreferenceScope::PenalizeUndeclared;
        assert!(inst.is_preference_violation(0, 1));
        assert!(!inst.is_preference_violation(1, 1));
        inst.interpretation.preference_scope = PreferenceScope::Literal;
        assert!(inst.is_preference_violation(1, 1));
        assert!(!inst.is_preference_violation(2, 0));
    }

    #[test]
    fn break_rule_is_strict() {
        let p = Params::default();
        assert!(!p.needs_break(432));
        assert!(p.needs_break(433));
        assert_eq!(p.paid_minutes(525), 495);
        assert_eq!(p.paid_minutes(432), 432);
    }
}
