//! The three-town, nine-site school network with its twenty collaborators.
//!
//! Only eleven of the twelve male collaborators are named in the source
//! roster. The twelfth is the placeholder `X1`: male, full-time, no binding
//! sites and no preferences.

use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{
    Collaborator, Contract, Gender, Instance, Level, ShiftSpec, Site, Timetable, Weights,
    DEFAULT_DAYS, DEFAULT_SHIFTS,
};

pub const CITIES: [&str; 3] = ["Cerisano", "Marano Marchesato", "Marano Principato"];

/// Short city tags used in site ids.
const CITY_TAGS: [&str; 3] = ["Cerisano", "Marchesato", "Principato"];

type Week = [[&'static str; 5]; 2];

const KINDERGARTEN: Week = [
    ["07:30-14:42"; 5],
    ["09:18-16:30"; 5],
];

const PRIMARY_ROW: [&str; 5] = [
    "07:45-16:30",
    "07:45-14:15",
    "07:45-14:15",
    "07:45-16:30",
    "07:45-14:15",
];

const PRIMARY: Week = [PRIMARY_ROW, PRIMARY_ROW];

/// Weekly windows per (city, level), `[T1, T2]` by day Mon..Fri.
pub const TIMETABLE: [[Week; 3]; 3] = [
    [
        KINDERGARTEN,
        PRIMARY,
        [
            ["07:30-14:42"; 5],
            [
                "11:18-18:30",
                "11:18-18:30",
                "10:18-17:30",
                "10:18-17:30",
                "08:00-15:12",
            ],
        ],
    ],
    [
        KINDERGARTEN,
        PRIMARY,
        [
            ["07:45-14:57"; 5],
            [
                "07:45-14:57",
                "07:45-14:57",
                "11:18-18:30",
                "07:45-14:57",
                "11:18-18:30",
            ],
        ],
    ],
    [
        KINDERGARTEN,
        PRIMARY,
        [
            ["07:45-14:57"; 5],
            [
                "11:14-15:00",
                "07:45-14:57",
                "11:18-18:30",
                "11:18-18:30",
                "10:18-17:30",
            ],
        ],
    ],
];

pub const FEMALE: [&str; 8] = ["CG", "SG", "DB", "RB", "FR", "RD", "TA", "TG"];
pub const PART_TIME: [&str; 2] = ["TA", "TG"];
pub const MALE: [&str; 12] = [
    "AP", "BA", "BE", "BG", "CA", "CM", "CG2", "MM", "PG", "ME", "MS", "X1",
];

/// (collaborator, city index, level) rows of the binding block.
pub const BINDING: [(&str, usize, Level); 12] = [
    ("CM", 0, Level::Secondary),
    ("CG", 0, Level::Kindergarten),
    ("SG", 0, Level::Kindergarten),
    ("MM", 1, Level::Primary),
    ("DB", 1, Level::Primary),
    ("CG2", 1, Level::Secondary),
    ("RB", 1, Level::Kindergarten),
    ("PG", 1, Level::Kindergarten),
    ("ME", 1, Level::Secondary),
    ("BE", 2, Level::Secondary),
    ("RD", 2, Level::Primary),
    ("FR", 2, Level::Kindergarten),
];

/// (collaborator, city index, level or `None` for every level) rows of the
/// non-binding block.
pub const PREFERENCES: [(&str, usize, Option<Level>); 3] = [
    ("CA", 0, None),
    ("BG", 0, Some(Level::Primary)),
    ("AP", 0, Some(Level::Secondary)),
];

pub fn site_id(city: usize, level: Level) -> String {
    alloc::format!("{}-{}", CITY_TAGS[city], level.as_str())
}

fn site_index(city: usize, level: Level) -> usize {
    city * 3 + Level::ALL.iter().position(|l| *l == level).unwrap_or(0)
}

/// Builds the real-world case. The data is static and known to be valid.
pub fn build_real_case() -> Instance {
    let mut sites = Vec::with_capacity(9);
    for (city, name) in CITIES.iter().enumerate() {
        for level in Level::ALL {
            sites.push(Site::new(site_id(city, level), *name, level));
        }
    }

    let mut collaborators: Vec<Collaborator> = FEMALE
        .iter()
        .map(|id| (*id, Gender::Female))
        .chain(MALE.iter().map(|id| (*id, Gender::Male)))
        .map(|(id, gender)| {
            let contract = if PART_TIME.contains(&id) {
                Contract::PartTime
            } else {
                Contract::FullTime
            };
            Collaborator::new(id, gender, contract)
        })
        .collect();

    for (id, city, level) in BINDING {
        if let Some(c) = collaborators.iter_mut().find(|c| c.id == id) {
            c.binding_sites.insert(site_index(city, level));
        }
    }
    for (id, city, level) in PREFERENCES {
        if let Some(c) = collaborators.iter_mut().find(|c| c.id == id) {
            match level {
                Some(l) => {
                    c.preferred_sites.insert(site_index(city, l));
                }
                None => c
                    .preferred_sites
                    .extend(Level::ALL.iter().map(|l| site_index(city, *l))),
            }
        }
    }

    let mut timetable = Timetable::empty(9, DEFAULT_DAYS.len(), DEFAULT_SHIFTS.len());
    for (city, levels) in TIMETABLE.iter().enumerate() {
        for (li, week) in levels.iter().enumerate() {
            for (shift, row) in week.iter().enumerate() {
                for (day, cell) in row.iter().enumerate() {
                    let spec: ShiftSpec = cell.parse().expect("static timetable cell");
                    timetable.set(city * 3 + li, day, shift, Some(spec));
                }
            }
        }
    }

    let mut inst = Instance::with_defaults(sites, collaborators);
    inst.timetable = timetable;
    inst.weights = Weights([0.5, 0.3, 0.2]);
    inst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{active_slots, candidate_sites, validate_instance, Slot};

    #[test]
    fn structure() {
        let inst = build_real_case();
        assert_eq!(inst.n_sites(), 9);
        assert_eq!(inst.n_collaborators(), 20);
        assert_eq!(inst.collaborators.iter().filter(|c| c.is_female()).count(), 8);
        assert_eq!(
            inst.collaborators
                .iter()
                .filter(|c| c.contract == Contract::PartTime)
                .count(),
            2
        );
        assert_eq!(active_slots(&inst).len(), 90);
        assert_eq!(
            inst.collaborators
                .iter()
                .filter(|c| !c.binding_sites.is_empty())
                .count(),
            12
        );
        assert_eq!(
            inst.collaborators
                .iter()
                .filter(|c| !c.preferred_sites.is_empty())
                .count(),
            3
        );
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn candidate_domains() {
        let inst = build_real_case();
        let cm = inst.collaborator_index("CM").unwrap();
        let expect = inst.site_index("Cerisano-Secondary").unwrap();
        assert_eq!(candidate_sites(cm, &inst), [expect].into_iter().collect());
        let ca = inst.collaborator_index("CA").unwrap();
        assert_eq!(candidate_sites(ca, &inst).len(), 9);
        let x1 = inst.collaborator_index("X1").unwrap();
        assert_eq!(candidate_sites(x1, &inst).len(), 9);
    }

    #[test]
    fn durations() {
        let inst = build_real_case();
        let ps = inst.site_index("Principato-Secondary").unwrap();
        assert_eq!(inst.duration(Slot::new(ps, 0, 1)), Some(226));
        let cp = inst.site_index("Cerisano-Primary").unwrap();
        assert_eq!(inst.duration(Slot::new(cp, 0, 0)), Some(525));
        assert_eq!(inst.duration(Slot::new(cp, 1, 0)), Some(390));
        let ck = inst.site_index("Cerisano-Kindergarten").unwrap();
        assert_eq!(inst.duration(Slot::new(ck, 2, 1)), Some(432));
    }
}
