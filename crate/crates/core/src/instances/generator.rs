//! Seeded synthetic instances scaled from the real network.
//!
//! All randomness comes from ChaCha8 seeded with `seed_from_u64`, which is
//! specified independently of platform and word size, so a seed reproduces
//! the same instance everywhere. Ratio counts use half-up rounding on exact
//! integer arithmetic (ratios are taken in parts per million).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::real_case::TIMETABLE;
use crate::model::{
    validate_instance, Collaborator, Contract, Defect, Gender, Instance, Level, ShiftSpec, Site,
    Timetable, Weights, DEFAULT_DAYS, DEFAULT_SHIFTS,
};

pub const MAX_BINDING_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_collab: usize,
    pub seed: u64,
    pub female_ratio: f64,
    pub pt_ratio: f64,
    pub city_ratio: f64,
    pub binding_ratio: f64,
    pub pref_ratio: f64,
    pub jitter_minutes: u16,
}

impl GeneratorConfig {
    pub fn new(n_collab: usize, seed: u64) -> Self {
        Self {
            n_collab,
            seed,
            female_ratio: 0.40,
            pt_ratio: 0.10,
            city_ratio: 0.15,
            binding_ratio: 0.60,
            pref_ratio: 0.15,
            jitter_minutes: 15,
        }
    }

    pub fn counts(&self) -> GeneratedCounts {
        let n = self.n_collab;
        let cities = round_ratio(n, self.city_ratio).max(1);
        let binding = round_ratio(n, self.binding_ratio).min(n);
        GeneratedCounts {
            cities,
            sites: 3 * cities,
            female: round_ratio(n, self.female_ratio).min(n),
            part_time: round_ratio(n, self.pt_ratio).clamp(1, n.max(1)),
            binding,
            preferring: round_ratio(n - binding, self.pref_ratio),
        }
    }
}

/// Head counts implied by a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedCounts {
    pub cities: usize,
    pub sites: usize,
    pub female: usize,
    pub part_time: usize,
    pub binding: usize,
    pub preferring: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("need at least 4 collaborators, got {0}")]
    TooFewCollaborators(usize),
    #[error("ratio {0} is outside [0, 1]")]
    BadRatio(f64),
    #[error("generated instance fails the feasibility screen after {attempts} attempts: {defect}")]
    Screen { attempts: usize, defect: Defect },
}

/// `round(n · ratio)` with halves rounded up.
pub fn round_ratio(n: usize, ratio: f64) -> usize {
    let ppm = libm::round(ratio * 1_000_000.0) as u64;
    ((n as u64 * ppm + 500_000) / 1_000_000) as usize
}

fn city_name(i: usize) -> String {
    format!("City{:02}", i + 1)
}

fn site_id(city: usize, level: Level) -> String {
    format!("City{:02}-{}", city + 1, level.as_str())
}

fn build_timetable(cities: usize, jitter: u16, rng: &mut ChaCha8Rng) -> Timetable {
    let mut tt = Timetable::empty(cities * 3, DEFAULT_DAYS.len(), DEFAULT_SHIFTS.len());
    let j = i32::from(jitter);
    for city in 0..cities {
        let template = &TIMETABLE[city % TIMETABLE.len()];
        for (li, week) in template.iter().enumerate() {
            for (shift, row) in week.iter().enumerate() {
                for (day, cell) in row.iter().enumerate() {
                    let base: ShiftSpec = cell.parse().expect("static timetable cell");
                    let delta = if j > 0 { rng.gen_range(-j..=j) } else { 0 };
                    let spec = base.shifted(delta).unwrap_or(base);
                    tt.set(city * 3 + li, day, shift, Some(spec));
                }
            }
        }
    }
    tt
}

fn assign_continuity(
    collaborators: &mut [Collaborator],
    counts: &GeneratedCounts,
    rng: &mut ChaCha8Rng,
) {
    let n = collaborators.len();
    for c in collaborators.iter_mut() {
        c.binding_sites.clear();
        c.preferred_sites.clear();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let (bound, rest) = order.split_at(counts.binding);
    for &c in bound {
        let site = rng.gen_range(0..counts.sites);
        collaborators[c].binding_sites.insert(site);
    }
    for &c in rest.iter().take(counts.preferring) {
        let city = rng.gen_range(0..counts.cities);
        collaborators[c]
            .preferred_sites
            .extend((0..3).map(|l| city * 3 + l));
    }
}

/// Builds a synthetic instance, or reports which screen could not be passed.
pub fn generate_synthetic(cfg: &GeneratorConfig) -> Result<Instance, GeneratorError> {
    if cfg.n_collab < 4 {
        return Err(GeneratorError::TooFewCollaborators(cfg.n_collab));
    }
    for r in [
        cfg.female_ratio,
        cfg.pt_ratio,
        cfg.city_ratio,
        cfg.binding_ratio,
        cfg.pref_ratio,
    ] {
        if !(0.0..=1.0).contains(&r) {
            return Err(GeneratorError::BadRatio(r));
        }
    }
    let counts = cfg.counts();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut sites = Vec::with_capacity(counts.sites);
    for city in 0..counts.cities {
        for level in Level::ALL {
            sites.push(Site::new(site_id(city, level), city_name(city), level));
        }
    }
    let timetable = build_timetable(counts.cities, cfg.jitter_minutes, &mut rng);

    let n = cfg.n_collab;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut female = alloc::vec![false; n];
    for &c in &order[..counts.female] {
        female[c] = true;
    }
    order.shuffle(&mut rng);
    let mut part_time = alloc::vec![false; n];
    for &c in &order[..counts.part_time] {
        part_time[c] = true;
    }
    let mut collaborators: Vec<Collaborator> = (0..n)
        .map(|c| {
            Collaborator::new(
                format!("P{:03}", c + 1),
                if female[c] { Gender::Female } else { Gender::Male },
                if part_time[c] {
                    Contract::PartTime
                } else {
                    Contract::FullTime
                },
            )
        })
        .collect();

    let mut inst = Instance::with_defaults(sites, Vec::new());
    inst.timetable = timetable;
    inst.weights = Weights([10.0, 7.0, 5.0]);

    let mut last = None;
    for attempt in 1..=MAX_BINDING_RESAMPLES {
        assign_continuity(&mut collaborators, &counts, &mut rng);
        inst.collaborators = collaborators.clone();
        let defects = validate_instance(&inst);
        match defects.into_iter().next() {
            None => return Ok(inst),
            // Resampling bindings cannot add collaborators or remove slots.
            Some(d @ Defect::CoverageImpossible { .. }) => {
                return Err(GeneratorError::Screen {
                    attempts: attempt,
                    defect: d,
                })
            }
            Some(d) => last = Some(d),
        }
    }
    Err(GeneratorError::Screen {
        attempts: MAX_BINDING_RESAMPLES,
        defect: last.expect("at least one attempt ran"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::active_slots;

    #[test]
    fn counts_for_benchmark_sizes() {
        let c = GeneratorConfig::new(40, 0).counts();
        assert_eq!(
            (c.cities, c.sites, c.female, c.part_time, c.binding),
            (6, 18, 16, 4, 24)
        );
        assert_eq!(GeneratorConfig::new(25, 0).counts().cities, 4);
        assert_eq!(GeneratorConfig::new(30, 0).counts().cities, 5);
        assert_eq!(GeneratorConfig::new(35, 0).counts().cities, 5);
        let c = GeneratorConfig::new(4, 0).counts();
        assert_eq!((c.cities, c.sites, c.part_time), (1, 3, 1));
    }

    #[test]
    fn half_up_rounding_is_exact() {
        assert_eq!(round_ratio(30, 0.15), 5);
        assert_eq!(round_ratio(25, 0.10), 3);
        assert_eq!(round_ratio(10, 0.15), 2);
        assert_eq!(round_ratio(16, 0.15), 2);
        assert_eq!(round_ratio(0, 0.5), 0);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_synthetic(&GeneratorConfig::new(25, 7)).unwrap();
        let b = generate_synthetic(&GeneratorConfig::new(25, 7)).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&GeneratorConfig::new(25, 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_instance_shape() {
        let inst = generate_synthetic(&GeneratorConfig::new(40, 3)).unwrap();
        assert_eq!(inst.n_sites(), 18);
        assert_eq!(active_slots(&inst).len(), 18 * 10);
        assert_eq!(inst.collaborators.iter().filter(|c| c.is_female()).count(), 16);
        assert!(validate_instance(&inst).is_empty());
        // jitter keeps durations from the template
        for s in 0..inst.n_sites() {
            let t = &TIMETABLE[(s / 3) % 3][s % 3];
            for d in 0..5 {
                for j in 0..2 {
                    let base: ShiftSpec = t[j][d].parse().unwrap();
                    let got = inst.timetable.get(s, d, j).unwrap();
                    assert_eq!(got.duration_minutes(), base.duration_minutes());
                    let shift = i32::from(got.start().minutes()) - i32::from(base.start().minutes());
                    assert!(shift.abs() <= 15);
                }
            }
        }
    }

    #[test]
    fn tiny_sizes_fail_coverage_screen() {
        let err = generate_synthetic(&GeneratorConfig::new(4, 1)).unwrap_err();
        assert!(matches!(
            err,
            GeneratorError::Screen {
                defect: Defect::CoverageImpossible { .. },
                ..
            }
        ));
        assert!(matches!(
            generate_synthetic(&GeneratorConfig::new(3, 1)),
            Err(GeneratorError::TooFewCollaborators(3))
        ));
    }
}
