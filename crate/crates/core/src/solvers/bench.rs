//! Multi-run statistics on generated instances.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::anneal::{simulated_anneal, SaParams};
use super::branch_bound::exact_branch_bound;
use super::{Clock, OPTIMALITY_TOLERANCE};
use crate::instances::{generate_synthetic, GeneratorConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub runs_per_size: u32,
    pub base_seed: u64,
    pub sa: SaParams,
    pub exact_time_limit_s: f64,
}

impl BenchConfig {
    pub fn new(sizes: Vec<usize>, runs_per_size: u32, base_seed: u64) -> Self {
        Self {
            sizes,
            runs_per_size,
            base_seed,
            sa: SaParams::default(),
            exact_time_limit_s: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n_collab: usize,
    pub instance_seed: u64,
    pub runs: u32,
    pub feasible_runs: u32,
    pub obj_mean: f64,
    pub obj_std: f64,
    pub time_mean_s: f64,
    pub time_std_s: f64,
    /// Share of runs at the proven optimum, in percent; `None` when the
    /// exact reference did not finish.
    pub pct_optimal: Option<f64>,
    /// Objective of the exact solver's incumbent.
    pub reference: f64,
    pub reference_feasible: bool,
    pub reference_proven: bool,
    /// Objectives of the feasible runs; the statistics above cover only these.
    pub objectives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Sizes whose instance could not be generated, with the cause.
    pub failures: Vec<(usize, String)>,
}

/// Population mean and standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.iter().all(|&x| x == xs[0]) {
        return (xs[0], 0.0);
    }
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

/// Runs every size in order. A size whose instance cannot be generated is
/// recorded in `failures` and the others continue.
pub fn bench(cfg: &BenchConfig, clock: &dyn Clock) -> BenchReport {
    let mut report = BenchReport::default();
    let runs = cfg.runs_per_size.max(1);
    for &n in &cfg.sizes {
        let seed = cfg.base_seed.wrapping_add(n as u64);
        let inst = match generate_synthetic(&GeneratorConfig::new(n, seed)) {
            Ok(inst) => inst,
            Err(e) => {
                report.failures.push((n, e.to_string()));
                continue;
            }
        };
        let reference = exact_branch_bound(&inst, cfg.exact_time_limit_s, clock);

        let mut objectives = Vec::with_capacity(runs as usize);
        let mut times = Vec::with_capacity(runs as usize);
        let mut feasible_runs = 0;
        for r in 0..runs {
            let params = SaParams {
                seed: seed.wrapping_mul(1000).wrapping_add(u64::from(r)),
                ..cfg.sa
            };
            let res = simulated_anneal(&inst, &params, clock);
            if res.feasible {
                feasible_runs += 1;
                objectives.push(res.objective());
            }
            times.push(res.elapsed_seconds);
        }
        let (obj_mean, obj_std) = mean_std(&objectives);
        let (time_mean_s, time_std_s) = mean_std(&times);
        let pct_optimal = reference.proven_optimal.then(|| {
            let hits = objectives
                .iter()
                .filter(|&&o| libm::fabs(o - reference.objective()) <= OPTIMALITY_TOLERANCE)
                .count();
            100.0 * hits as f64 / f64::from(runs)
        });
        report.rows.push(BenchRow {
            n_collab: n,
            instance_seed: seed,
            runs,
            feasible_runs,
            obj_mean,
            obj_std,
            time_mean_s,
            time_std_s,
            pct_optimal,
            reference: reference.objective(),
            reference_feasible: reference.feasible,
            reference_proven: reference.proven_optimal,
            objectives,
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::NoClock;

    #[test]
    fn mean_std_population() {
        assert_eq!(mean_std(&[2.0, 2.0, 2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }

    #[test]
    fn failing_size_does_not_stop_others() {
        let mut cfg = BenchConfig::new(alloc::vec![4, 25], 1, 0);
        cfg.sa.cooling_factor = 0.8;
        cfg.exact_time_limit_s = 0.0;
        let r = bench(&cfg, &NoClock);
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].obj_std, 0.0);
        assert_eq!(r.rows[0].pct_optimal, None);
    }
}
