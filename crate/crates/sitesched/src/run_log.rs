//! Wall clock and the JSON log written next to every solve.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sitesched_core::model::{Instance, Interpretation, Params, Weights};
use sitesched_core::objective::ObjectiveBreakdown;
use sitesched_core::solvers::Clock;

use crate::instance_file::instance_to_json;

/// Seconds since construction.
#[derive(Debug, Clone, Copy)]
pub struct SystemClock(Instant);

impl SystemClock {
    pub fn start() -> Self {
        SystemClock(Instant::now())
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::start()
    }
}

impl Clock for SystemClock {
    fn now_seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Hex SHA-256 of the canonical instance JSON.
pub fn instance_hash(inst: &Instance) -> String {
    hex::encode(Sha256::digest(instance_to_json(inst).as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub solver: String,
    pub seed: u64,
    pub time_limit_s: f64,
    pub instance_sha256: String,
    pub params: Params,
    pub weights: Weights,
    pub interpretation: Interpretation,
    /// Solver-specific settings, e.g. the annealing schedule.
    pub solver_params: serde_json::Value,
    pub elapsed_s: f64,
    pub feasible: bool,
    pub proven_optimal: bool,
    pub iterations: u64,
    pub breakdown: ObjectiveBreakdown,
}
