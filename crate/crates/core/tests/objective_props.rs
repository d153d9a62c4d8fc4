use proptest::prelude::*;

use sitesched_core::instances::{build_real_case, generate_toy, ToySpec};
use sitesched_core::model::{active_slots, Instance, Weights};
use sitesched_core::objective::{
    derived_b, derived_y, total_objective, worked_minutes, Assignment, Schedule,
};

fn instance(seed: u64) -> Instance {
    if seed % 10 == 0 {
        return build_real_case();
    }
    let spec = ToySpec {
        max_collab: 5,
        max_sites: 4,
        max_days: 5,
        max_shifts: 2,
        tight_caps: seed % 2 == 0,
    };
    generate_toy(seed, &spec)
}

/// At most one slot per (collaborator, day), drawn from the domain.
fn schedule(inst: &Instance, picks: &[u32]) -> Schedule {
    let slots = active_slots(inst);
    let mut sch = Schedule::new();
    let mut k = 0;
    for c in 0..inst.n_collaborators() {
        for d in 0..inst.n_days() {
            let opts: Vec<_> = slots
                .iter()
                .filter(|s| s.day == d && inst.is_candidate(c, s.site))
                .collect();
            let pick = picks.get(k).copied().unwrap_or(0) as usize % (opts.len() + 1);
            k += 1;
            if pick > 0 {
                sch.insert(Assignment::new(c, *opts[pick - 1]));
            }
        }
    }
    sch
}

fn respects_caps(inst: &Instance, sch: &Schedule) -> bool {
    (0..inst.n_collaborators()).all(|c| worked_minutes(sch, inst, c).1 <= inst.weekly_cap(c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn terms_are_normalized(seed in 0u64..5000, picks in proptest::collection::vec(any::<u32>(), 100)) {
        let inst = instance(seed);
        let sch = schedule(&inst, &picks);
        prop_assume!(respects_caps(&inst, &sch));
        let b = total_objective(&sch, &inst);
        for t in [b.multi_site, b.hours_deviation, b.preference] {
            prop_assert!((0.0..=1.0).contains(&t), "{b:?}");
        }
        prop_assert!((0.0..=1.0).contains(&b.total));
    }

    #[test]
    fn raw_weight_scale_is_irrelevant(
        seed in 0u64..5000,
        picks in proptest::collection::vec(any::<u32>(), 100),
        raw in (0.1f64..10.0, 0.1f64..10.0, 0.1f64..10.0),
        lambda in 0.01f64..100.0,
    ) {
        let mut a = instance(seed);
        a.weights = Weights([raw.0, raw.1, raw.2]);
        let mut b = a.clone();
        b.weights = Weights([raw.0 * lambda, raw.1 * lambda, raw.2 * lambda]);
        let sch = schedule(&a, &picks);
        let (x, y) = (total_objective(&sch, &a), total_objective(&sch, &b));
        prop_assert!((x.total - y.total).abs() < 1e-12);
        prop_assert_eq!(x.multi_site, y.multi_site);
        prop_assert_eq!(x.hours_deviation, y.hours_deviation);
        prop_assert_eq!(x.preference, y.preference);
    }

    #[test]
    fn derived_indicators_satisfy_linking(seed in 0u64..5000, picks in proptest::collection::vec(any::<u32>(), 100)) {
        let inst = instance(seed);
        let sch = schedule(&inst, &picks);
        let dj = (inst.n_days() * inst.n_shifts()) as u32;
        let sj = (inst.n_sites() * inst.n_shifts()) as u32;
        for c in 0..inst.n_collaborators() {
            for s in 0..inst.n_sites() {
                let y = u32::from(derived_y(&sch, c, s));
                let n = sch.of(c).filter(|a| a.slot.site == s).count() as u32;
                prop_assert!(y <= n && n <= dj * y);
            }
            for d in 0..inst.n_days() {
                let b = u32::from(derived_b(&sch, &inst, c, d));
                let long = sch
                    .of(c)
                    .filter(|a| a.slot.day == d)
                    .filter(|a| inst.duration(a.slot).is_some_and(|q| inst.params.needs_break(q)))
                    .count() as u32;
                prop_assert!(long <= sj * b && b <= long);
            }
        }
    }
}

#[test]
fn empty_schedule_breakdown() {
    for seed in [0, 1, 2, 3] {
        let inst = instance(seed);
        let b = total_objective(&Schedule::new(), &inst);
        assert_eq!((b.multi_site, b.hours_deviation, b.preference), (0.0, 1.0, 0.0));
    }
}
