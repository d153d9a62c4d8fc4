use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::{active_slots, Instance};

/// A reason an instance is malformed or provably infeasible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Defect {
    NoDays,
    NoShifts,
    TimetableShape {
        expected: (usize, usize, usize),
        found: (usize, usize, usize),
    },
    InvalidWeights,
    DuplicateSiteId(String),
    DuplicateCityLevel {
        city: String,
        level: super::Level,
    },
    DuplicateCollaboratorId(String),
    UnknownSite {
        collaborator: String,
        site: usize,
    },
    CoverageImpossible {
        day: String,
        slots: usize,
        collaborators: usize,
    },
    KindergartenWithoutFemale {
        site: String,
    },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::NoDays => f.write_str("calendar has no days"),
            Defect::NoShifts => f.write_str("calendar has no shifts"),
            Defect::TimetableShape { expected, found } => write!(
                f,
                "timetable shape {found:?} does not match (sites, days, shifts) = {expected:?}"
            ),
            Defect::InvalidWeights => f.write_str("weights must be finite, nonnegative and not all zero"),
            Defect::DuplicateSiteId(id) => write!(f, "duplicate site id `{id}`"),
            Defect::DuplicateCityLevel { city, level } => {
                write!(f, "more than one {level} site in city `{city}`")
            }
            Defect::DuplicateCollaboratorId(id) => write!(f, "duplicate collaborator id `{id}`"),
            Defect::UnknownSite { collaborator, site } => {
                write!(f, "collaborator `{collaborator}` references unknown site #{site}")
            }
            Defect::CoverageImpossible {
                day,
                slots,
                collaborators,
            } => write!(
                f,
                "coverage impossible on day {day}: {slots} active slots but only {collaborators} collaborators"
            ),
            Defect::KindergartenWithoutFemale { site } => {
                write!(f, "kindergarten `{site}` has no female collaborator in its candidate domain")
            }
        }
    }
}

/// Structural checks plus a necessary-feasibility screen. Empty means the
/// instance is well formed and not trivially infeasible.
pub fn validate_instance(inst: &Instance) -> Vec<Defect> {
    let mut defects = Vec::new();
    if inst.days.is_empty() {
        defects.push(Defect::NoDays);
    }
    if inst.shifts.is_empty() {
        defects.push(Defect::NoShifts);
    }
    let tt = &inst.timetable;
    let expected = (inst.n_sites(), inst.n_days(), inst.n_shifts());
    let found = (tt.n_sites(), tt.n_days(), tt.n_shifts());
    let shape_ok = expected == found;
    if !shape_ok {
        defects.push(Defect::TimetableShape { expected, found });
    }
    if !inst.weights.is_valid() {
        defects.push(Defect::InvalidWeights);
    }

    let mut ids = BTreeSet::new();
    let mut pairs = BTreeSet::new();
    for site in &inst.sites {
        if !ids.insert(site.id.as_str()) {
            defects.push(Defect::DuplicateSiteId(site.id.clone()));
        }
        if !pairs.insert((site.city.as_str(), site.level)) {
            defects.push(Defect::DuplicateCityLevel {
                city: site.city.clone(),
                level: site.level,
            });
        }
    }
    let mut cids = BTreeSet::new();
    for c in &inst.collaborators {
        if !cids.insert(c.id.as_str()) {
            defects.push(Defect::DuplicateCollaboratorId(c.id.clone()));
        }
        for &s in c.binding_sites.iter().chain(c.preferred_sites.iter()) {
            if s >= inst.n_sites() {
                defects.push(Defect::UnknownSite {
                    collaborator: c.id.clone(),
                    site: s,
                });
            }
        }
    }
    if !shape_ok {
        return defects;
    }

    let mut per_day = alloc::vec![0usize; inst.n_days()];
    for slot in active_slots(inst) {
        per_day[slot.day] += 1;
    }
    for (day, &slots) in per_day.iter().enumerate() {
        if slots > inst.n_collaborators() {
            defects.push(Defect::CoverageImpossible {
                day: inst.days[day].clone(),
                slots,
                collaborators: inst.n_collaborators(),
            });
        }
    }

    for (s, site) in inst.sites.iter().enumerate() {
        if !site.is_kindergarten() {
            continue;
        }
        let has_female = inst
            .collaborators
            .iter()
            .enumerate()
            .any(|(c, collab)| collab.is_female() && inst.is_candidate(c, s));
        if !has_female {
            defects.push(Defect::KindergartenWithoutFemale { site: site.id.clone() });
        }
    }
    defects
}

#[cfg(test)]
mod tests {
    use alloc::string::ToString;
    use super::*;
    use crate::model::{Collaborator, Contract, Gender, Level, Site, Weights};
    use alloc::vec;

    fn open_all(inst: &mut Instance, spec: &str) {
        for s in 0..inst.n_sites() {
            for d in 0..inst.n_days() {
                for j in 0..inst.n_shifts() {
                    inst.timetable.set(s, d, j, Some(spec.parse().unwrap()));
                }
            }
        }
    }

    #[test]
    fn pigeonhole_defect_per_day() {
        let sites = vec![
            Site::new("p", "A", Level::Primary),
            Site::new("s", "A", Level::Secondary),
        ];
        let collabs = vec![
            Collaborator::new("a", Gender::Male, Contract::FullTime),
            Collaborator::new("b", Gender::Male, Contract::FullTime),
        ];
        let mut inst = Instance::with_defaults(sites, collabs);
        inst.days.truncate(1);
        inst.timetable = crate::model::Timetable::empty(2, 1, 2);
        open_all(&mut inst, "08:00-12:00");
        inst.timetable.set(1, 0, 1, None);
        // 3 slots, 2 people
        let defects = validate_instance(&inst);
        assert_eq!(
            defects,
            vec![Defect::CoverageImpossible {
                day: "Mon".into(),
                slots: 3,
                collaborators: 2
            }]
        );
    }

    #[test]
    fn kindergarten_needs_female_candidate() {
        let sites = vec![
            Site::new("k", "A", Level::Kindergarten),
            Site::new("p", "A", Level::Primary),
        ];
        let collabs = vec![
            Collaborator::new("f", Gender::Female, Contract::FullTime).bound_to([1]),
            Collaborator::new("m", Gender::Male, Contract::FullTime),
        ];
        let mut inst = Instance::with_defaults(sites, collabs);
        inst.timetable.set(0, 0, 0, Some("08:00-12:00".parse().unwrap()));
        let defects = validate_instance(&inst);
        assert_eq!(defects, vec![Defect::KindergartenWithoutFemale { site: "k".into() }]);
        assert!(defects[0].to_string().contains("`k`"));
    }

    #[test]
    fn structural_defects() {
        let sites = vec![
            Site::new("x", "A", Level::Primary),
            Site::new("x", "A", Level::Primary),
        ];
        let collabs = vec![
            Collaborator::new("c", Gender::Male, Contract::FullTime).bound_to([7]),
            Collaborator::new("c", Gender::Male, Contract::FullTime),
        ];
        let mut inst = Instance::with_defaults(sites, collabs);
        inst.weights = Weights([0.0, 0.0, 0.0]);
        let defects = validate_instance(&inst);
        assert!(defects.contains(&Defect::InvalidWeights));
        assert!(defects.contains(&Defect::DuplicateSiteId("x".into())));
        assert!(defects.contains(&Defect::DuplicateCollaboratorId("c".into())));
        assert!(defects.contains(&Defect::UnknownSite {
            collaborator: "c".into(),
            site: 7
        }));
        assert!(defects.iter().any(|d| matches!(d, Defect::DuplicateCityLevel { .. })));
    }

    #[test]
    fn empty_calendar() {
        let mut inst = Instance::with_defaults(vec![], vec![]);
        inst.days.clear();
        inst.shifts.clear();
        inst.timetable = crate::model::Timetable::empty(0, 0, 0);
        let d = validate_instance(&inst);
        assert!(d.contains(&Defect::NoDays));
        assert!(d.contains(&Defect::NoShifts));
    }
}
