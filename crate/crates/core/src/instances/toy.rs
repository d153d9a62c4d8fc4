//! Tiny seeded instances for exhaustive cross-checks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{
    Collaborator, Contract, Gender, Instance, Level, Params, ShiftSpec, Site, Timetable,
    TimeOfDay, DEFAULT_DAYS, DEFAULT_SHIFTS,
};

/// Upper bounds on the dimensions of a toy instance. Each dimension is drawn
/// uniformly between 1 and its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToySpec {
    pub max_collab: usize,
    pub max_sites: usize,
    pub max_days: usize,
    pub max_shifts: usize,
    /// Draw small weekly caps so the limit rows can bind.
    pub tight_caps: bool,
}

impl Default for ToySpec {
    fn default() -> Self {
        Self {
            max_collab: 3,
            max_sites: 3,
            max_days: 2,
            max_shifts: 2,
            tight_caps: true,
        }
    }
}

const DURATIONS: [u16; 7] = [180, 240, 300, 390, 432, 480, 525];

fn shift(start_h: u16, minutes: u16) -> ShiftSpec {
    let start = TimeOfDay::from_hm(start_h, 0).expect("valid hour");
    let end = TimeOfDay::from_minutes(start.minutes() + minutes).expect("fits in a day");
    ShiftSpec::new(start, end).expect("positive length")
}

/// Same seed and spec, same instance. Toys are well formed but may have
/// no feasible schedule.
pub fn generate_toy(seed: u64, spec: &ToySpec) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_collab = rng.gen_range(1..=spec.max_collab.max(1));
    let n_sites = rng.gen_range(1..=spec.max_sites.max(1));
    let n_days = rng.gen_range(1..=spec.max_days.clamp(1, DEFAULT_DAYS.len()));
    let n_shifts = rng.gen_range(1..=spec.max_shifts.clamp(1, DEFAULT_SHIFTS.len()));

    let sites: Vec<Site> = (0..n_sites)
        .map(|s| {
            let level = *Level::ALL.choose(&mut rng).expect("three levels");
            Site::new(format!("t{s}"), format!("Toy{s}"), level)
        })
        .collect();

    let mut timetable = Timetable::empty(n_sites, n_days, n_shifts);
    for s in 0..n_sites {
        for d in 0..n_days {
            for j in 0..n_shifts {
                if rng.gen_bool(0.6) {
                    let q = *DURATIONS.choose(&mut rng).expect("nonempty");
                    // afternoon shifts start late enough not to matter
                    let (start, q) = if j == 0 { (7, q) } else { (14, q.min(480)) };
                    timetable.set(s, d, j, Some(shift(start, q)));
                }
            }
        }
    }

    let mut collaborators: Vec<Collaborator> = (0..n_collab)
        .map(|c| {
            let gender = if rng.gen_bool(0.5) { Gender::Female } else { Gender::Male };
            let contract = if rng.gen_bool(0.25) {
                Contract::PartTime
            } else {
                Contract::FullTime
            };
            let mut collab = Collaborator::new(format!("c{c}"), gender, contract);
            if n_sites > 1 && rng.gen_bool(0.3) {
                let k = rng.gen_range(1..n_sites);
                let mut all: Vec<usize> = (0..n_sites).collect();
                all.shuffle(&mut rng);
                collab = collab.bound_to(all.into_iter().take(k));
            }
            if rng.gen_bool(0.3) {
                collab = collab.preferring([rng.gen_range(0..n_sites)]);
            }
            collab
        })
        .collect();

    if sites.iter().any(Site::is_kindergarten) {
        // keep every kindergarten reachable by a woman
        collaborators[0].gender = Gender::Female;
        collaborators[0].binding_sites.clear();
    }
    let mut inst = Instance::with_defaults(sites, collaborators);
    inst.days = DEFAULT_DAYS[..n_days].iter().map(|d| String::from(*d)).collect();
    inst.shifts = DEFAULT_SHIFTS[..n_shifts].iter().map(|j| String::from(*j)).collect();
    inst.timetable = timetable;
    if spec.tight_caps {
        let ft = *[480u32, 720, 900].choose(&mut rng).expect("nonempty");
        inst.params = Params {
            h_ft_minutes: ft,
            h_pt_minutes: ft / 2,
            ..Params::default()
        };
    }
    inst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_instance, Defect};

    #[test]
    fn deterministic_and_within_bounds() {
        let spec = ToySpec::default();
        for seed in 0..50 {
            let a = generate_toy(seed, &spec);
            assert_eq!(a, generate_toy(seed, &spec));
            assert!(a.n_collaborators() <= 3 && a.n_sites() <= 3 && a.n_days() <= 2);
            // toys may be infeasible, but never malformed
            let defects = validate_instance(&a);
            assert!(
                defects.iter().all(|d| matches!(d, Defect::CoverageImpossible { .. })),
                "seed {seed}: {defects:?}"
            );
        }
    }
}
