//! Construction, local search and exact search for weekly rosters.
//!
//! Every solver reports a [`SolveResult`] whose `feasible` flag is recomputed
//! with [`verify`](crate::feasibility::verify) before returning. Wall-clock
//! access goes through [`Clock`] so the crate needs no operating system; with
//! [`NoClock`] time limits never trigger and runs are fully reproducible.

mod anneal;
mod bench;
mod branch_bound;
mod brute_force;
mod greedy;
pub mod state;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::feasibility::verify;
use crate::model::Instance;
use crate::objective::{total_objective, ObjectiveBreakdown, Schedule};

pub use anneal::{simulated_anneal, SaParams};
pub use bench::{bench, BenchConfig, BenchReport, BenchRow};
pub use branch_bound::{exact_branch_bound, exact_branch_bound_from, BranchBoundStats};
pub use brute_force::{brute_force_oracle, leaf_count, OracleError, MAX_ORACLE_LEAVES};
pub use greedy::greedy_construct;

/// Source of monotonically increasing seconds.
pub trait Clock {
    fn now_seconds(&self) -> f64;
}

/// A clock that never advances.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_seconds(&self) -> f64 {
        0.0
    }
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now_seconds(&self) -> f64 {
        (**self).now_seconds()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub schedule: Schedule,
    pub breakdown: ObjectiveBreakdown,
    pub feasible: bool,
    pub elapsed_seconds: f64,
    pub proven_optimal: bool,
    pub iterations: u64,
    /// Best energy after each temperature level (annealing only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<f64>,
}

impl SolveResult {
    pub(crate) fn finish(
        inst: &Instance,
        schedule: Schedule,
        elapsed_seconds: f64,
        proven_optimal: bool,
        iterations: u64,
    ) -> Self {
        let feasible = verify(&schedule, inst).is_feasible();
        Self {
            breakdown: total_objective(&schedule, inst),
            schedule,
            feasible,
            elapsed_seconds,
            proven_optimal,
            iterations,
            trace: Vec::new(),
        }
    }

    pub fn objective(&self) -> f64 {
        self.breakdown.total
    }
}

/// Tolerance under which two objective values count as equal.
pub const OPTIMALITY_TOLERANCE: f64 = 1e-6;
