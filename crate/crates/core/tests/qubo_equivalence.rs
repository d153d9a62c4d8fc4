use sitesched_core::feasibility::{verify, ViolationKind};
use sitesched_core::instances::{generate_toy, ToySpec};
use sitesched_core::model::Instance;
use sitesched_core::objective::total_objective;
use sitesched_core::qubo::{
    brute_force_ground_state, decode, encode_qubo, min_penalty_bound, QuboModel, VarKind,
};
use sitesched_core::solvers::brute_force_oracle;

fn spec() -> ToySpec {
    ToySpec {
        max_collab: 2,
        max_sites: 2,
        max_days: 2,
        max_shifts: 2,
        tight_caps: true,
    }
}

/// Seeded toys whose encoding has between 6 and `max_vars` variables.
fn models(count: usize, max_vars: usize, feasible_only: bool) -> Vec<(u64, Instance, QuboModel)> {
    let mut out = Vec::new();
    for seed in 0..10_000u64 {
        if out.len() == count {
            break;
        }
        let inst = generate_toy(seed, &spec());
        let Ok(m) = encode_qubo(&inst, min_penalty_bound(&inst)) else {
            continue;
        };
        if !(6..=max_vars).contains(&m.n_vars()) {
            continue;
        }
        if feasible_only && !brute_force_oracle(&inst).unwrap().feasible {
            continue;
        }
        out.push((seed, inst, m));
    }
    assert_eq!(out.len(), count, "not enough toys");
    out
}

fn bits_of(pattern: u64, n: usize) -> Vec<u8> {
    (0..n).map(|i| u8::from(pattern >> i & 1 == 1)).collect()
}

/// Site indicators agree with the assignment bits.
fn indicators_consistent(m: &QuboModel, bits: &[u8]) -> bool {
    m.kinds.iter().enumerate().all(|(i, k)| match k {
        VarKind::Site { collaborator, site } => {
            let any = m.kinds.iter().zip(bits).any(|(k2, &b)| {
                b == 1
                    && matches!(k2, VarKind::Assign(a) if a.collaborator == *collaborator && a.slot.site == *site)
            });
            bits[i] == u8::from(any)
        }
        _ => true,
    })
}

#[test]
fn energy_splits_into_objective_and_violation() {
    for (seed, inst, m) in models(10, 16, false) {
        let n = m.n_vars();
        for pattern in 0..1u64 << n {
            let bits = bits_of(pattern, n);
            let e = m.energy(&bits).unwrap();
            let obj = m.objective_part(&bits).unwrap();
            let v = m.violation(&bits).unwrap();
            assert!((e - (obj + m.penalty_weight * v)).abs() < 1e-9, "seed {seed}");
            assert!(v >= -1e-9 && (v - v.round()).abs() < 1e-9, "seed {seed}: {v}");

            let sch = decode(&bits, &m, &inst).unwrap();
            let report = verify(&sch, &inst);
            if v.abs() < 1e-9 {
                assert!(report.is_feasible(), "seed {seed} pattern {pattern}");
            }
            let one_per_day = report.count(ViolationKind::OneShiftPerDay) == 0;
            if one_per_day && indicators_consistent(&m, &bits) {
                let t = total_objective(&sch, &inst).total;
                assert!((obj - t).abs() < 1e-9, "seed {seed}: {obj} vs {t}");
            }
            if report.is_feasible() {
                let clean = m.bits_for(&sch);
                assert_eq!(m.violation(&clean).unwrap(), 0.0, "seed {seed}");
            }
        }
    }
}

#[test]
fn ground_states_are_constrained_optima() {
    for (seed, inst, m) in models(20, 22, true) {
        let (bits, _) = brute_force_ground_state(&m).unwrap();
        let sch = decode(&bits, &m, &inst).unwrap();
        assert!(verify(&sch, &inst).is_feasible(), "seed {seed}");
        let opt = brute_force_oracle(&inst).unwrap().objective();
        let got = total_objective(&sch, &inst).total;
        assert!((got - opt).abs() <= 1e-9, "seed {seed}: {got} vs {opt}");
    }
}

#[test]
fn encoding_is_deterministic() {
    for (_, inst, m) in models(5, 64, false) {
        assert_eq!(m, encode_qubo(&inst, m.penalty_weight).unwrap());
    }
}
