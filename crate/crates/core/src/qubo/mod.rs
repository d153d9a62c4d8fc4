//! Penalty reduction of the constrained model to a QUBO, plus an exhaustive
//! ground-state search for small models.
//!
//! Variables, in index order: one `x` per candidate-domain assignment, then
//! per (collaborator, site) a `y` site indicator with its gadget slack, then
//! the slack bits of each inequality row. The energy is
//! `objective(bits) + penalty_weight * violation(bits)` where `violation` is
//! a sum of squared integer residuals, hence zero or at least one.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{domain_assignments, ConstraintSet, Family, Sense};
use crate::model::{CollabIdx, Instance, SiteIdx};
use crate::objective::{total_target_minutes, Assignment, Denominators, Schedule};

/// Default ceiling on the number of binary variables.
pub const DEFAULT_VARIABLE_CAP: usize = 64;

/// Largest model [`brute_force_ground_state`] will enumerate.
pub const MAX_BRUTE_FORCE_VARIABLES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuboError {
    #[error("encoding needs {count} binary variables, cap is {cap}")]
    VariableCapExceeded { count: usize, cap: usize },
    #[error("{count} variables is too many for exhaustive search (limit {limit})")]
    TooManyVariables { count: usize, limit: usize },
    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Role of a binary variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Assign(Assignment),
    /// 1 iff the collaborator works at the site at least once.
    Site { collaborator: CollabIdx, site: SiteIdx },
    /// Bit of a binary-expanded slack, with its weight.
    Slack { weight: i64 },
}

/// Quadratic polynomial over binary variables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    pub linear: BTreeMap<usize, f64>,
    /// Keys always satisfy `i < j`.
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl Poly {
    fn add_linear(&mut self, i: usize, v: f64) {
        *self.linear.entry(i).or_insert(0.0) += v;
    }

    fn add_pair(&mut self, i: usize, j: usize, v: f64) {
        match i.cmp(&j) {
            core::cmp::Ordering::Equal => self.add_linear(i, v),
            core::cmp::Ordering::Less => *self.quadratic.entry((i, j)).or_insert(0.0) += v,
            core::cmp::Ordering::Greater => *self.quadratic.entry((j, i)).or_insert(0.0) += v,
        }
    }

    /// Adds `(constant + Σ k·x)²`, using `x² = x`.
    fn add_square(&mut self, terms: &[(usize, i64)], constant: i64) {
        let c = constant as f64;
        self.offset += c * c;
        for (a, &(i, ki)) in terms.iter().enumerate() {
            let ki = ki as f64;
            self.add_linear(i, ki * ki + 2.0 * c * ki);
            for &(j, kj) in &terms[a + 1..] {
                self.add_pair(i, j, 2.0 * ki * kj as f64);
            }
        }
    }

    pub fn value(&self, bits: &[u8]) -> f64 {
        let mut e = self.offset;
        for (&i, &v) in &self.linear {
            if bits[i] != 0 {
                e += v;
            }
        }
        for (&(i, j), &v) in &self.quadratic {
            if bits[i] != 0 && bits[j] != 0 {
                e += v;
            }
        }
        e
    }

    fn prune(&mut self) {
        self.linear.retain(|_, v| *v != 0.0);
        self.quadratic.retain(|_, v| *v != 0.0);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboModel {
    pub names: Vec<String>,
    pub kinds: Vec<VarKind>,
    pub var_index: BTreeMap<String, usize>,
    /// Combined coefficients: objective plus `penalty_weight` times violation.
    pub linear: BTreeMap<usize, f64>,
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
    pub penalty_weight: f64,
    /// Objective part alone.
    pub objective: Poly,
    /// Unweighted violation part alone.
    pub violation: Poly,
    /// Slack bits of each encoded row, for building consistent bitstrings.
    rows: Vec<EncodedRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EncodedRow {
    /// `(x index, integer coefficient)`.
    terms: Vec<(usize, i64)>,
    /// Residual is `Σ k·x + sign·(low + Σ w·slack) - rhs`.
    sign: i64,
    low: i64,
    rhs: i64,
    slack: Vec<usize>,
}

impl QuboModel {
    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    fn check_len(&self, bits: &[u8]) -> Result<(), QuboError> {
        if bits.len() == self.n_vars() {
            Ok(())
        } else {
            Err(QuboError::LengthMismatch {
                expected: self.n_vars(),
                got: bits.len(),
            })
        }
    }

    pub fn energy(&self, bits: &[u8]) -> Result<f64, QuboError> {
        self.check_len(bits)?;
        let mut e = self.offset;
        for (&i, &v) in &self.linear {
            if bits[i] != 0 {
                e += v;
            }
        }
        for (&(i, j), &v) in &self.quadratic {
            if bits[i] != 0 && bits[j] != 0 {
                e += v;
            }
        }
        Ok(e)
    }

    /// Total violation (unweighted): zero iff every row and gadget holds.
    pub fn violation(&self, bits: &[u8]) -> Result<f64, QuboError> {
        self.check_len(bits)?;
        Ok(self.violation.value(bits))
    }

    pub fn objective_part(&self, bits: &[u8]) -> Result<f64, QuboError> {
        self.check_len(bits)?;
        Ok(self.objective.value(bits))
    }

    /// Bitstring for `sch` with site indicators and slacks set to their
    /// consistent values. Assignments outside the domain are dropped.
    pub fn bits_for(&self, sch: &Schedule) -> Vec<u8> {
        let mut bits = vec![0u8; self.n_vars()];
        for (i, kind) in self.kinds.iter().enumerate() {
            match kind {
                VarKind::Assign(a) => bits[i] = u8::from(sch.contains(a)),
                VarKind::Site { collaborator, site } => {
                    bits[i] = u8::from(sch.of(*collaborator).any(|a| a.slot.site == *site));
                }
                VarKind::Slack { .. } => {}
            }
        }
        for row in &self.rows {
            let lhs: i64 = row.terms.iter().map(|&(i, k)| k * i64::from(bits[i])).sum();
            // sign * slack = rhs - lhs
            let want = row.sign * (row.rhs - lhs) - row.low;
            let weights: Vec<i64> = row
                .slack
                .iter()
                .map(|&i| match self.kinds[i] {
                    VarKind::Slack { weight } => weight,
                    _ => 0,
                })
                .collect();
            let range: i64 = weights.iter().sum();
            if (0..=range).contains(&want) {
                for (b, v) in expand(want, &weights) {
                    bits[row.slack[b]] = v;
                }
            }
        }
        bits
    }
}

/// Weights of a bounded binary expansion covering exactly `0..=range`.
fn slack_weights(range: i64) -> Vec<i64> {
    let mut out = Vec::new();
    let mut covered = 0;
    let mut w = 1;
    while covered + w <= range {
        out.push(w);
        covered += w;
        w *= 2;
    }
    if covered < range {
        out.push(range - covered);
    }
    out
}

/// Bits reproducing `v`: the last, irregular weight first, then plain binary.
fn expand(v: i64, weights: &[i64]) -> Vec<(usize, u8)> {
    let mut rest = v;
    let n = weights.len();
    let mut out: Vec<(usize, u8)> = (0..n).map(|b| (b, 0)).collect();
    let regular: i64 = weights.iter().take(n.saturating_sub(1)).sum();
    let mut top = n;
    if n > 0 && rest > regular {
        rest -= weights[n - 1];
        out[n - 1] = (n - 1, 1);
        top = n - 1;
    }
    for (b, o) in out.iter_mut().enumerate().take(top) {
        *o = (b, u8::from(rest >> b & 1 == 1));
    }
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Penalty weight sufficient for ground-state equivalence.
///
/// With normalized weights the objective of any cap-respecting bitstring
/// lies in `[0, 1]`, and every violated row or gadget adds an integer
/// residual squared, so at least 1. A weight of `1 / 1 + 1` therefore puts
/// every violating state above every feasible one. Over-cap states can
/// lower the hours term, but only by `excess / total_target`, which the
/// squared cap residual outweighs.
pub fn min_penalty_bound(_inst: &Instance) -> f64 {
    let objective_range = 1.0;
    let min_increment = 1.0;
    objective_range / min_increment + 1.0
}

pub fn encode_qubo(inst: &Instance, penalty: f64) -> Result<QuboModel, QuboError> {
    encode_qubo_with_cap(inst, penalty, DEFAULT_VARIABLE_CAP)
}

pub fn encode_qubo_with_cap(
    inst: &Instance,
    penalty: f64,
    cap: usize,
) -> Result<QuboModel, QuboError> {
    let mut names: Vec<String> = Vec::new();
    let mut kinds: Vec<VarKind> = Vec::new();
    let mut push = |names: &mut Vec<String>, name: String, kind: VarKind| {
        names.push(name);
        kinds.push(kind);
        names.len() - 1
    };

    let xs = domain_assignments(inst);
    let mut x_of: BTreeMap<Assignment, usize> = BTreeMap::new();
    for a in &xs {
        let s = a.slot;
        let i = push(
            &mut names,
            format!("x[{},{},{},{}]", a.collaborator, s.site, s.day, s.shift),
            VarKind::Assign(*a),
        );
        x_of.insert(*a, i);
    }

    let w = inst.effective_weights().0;
    let den = Denominators::of(inst);
    let per = |wi: f64, d: f64| if d > 0.0 { wi / d } else { 0.0 };
    let mut objective = Poly::default();
    let mut violation = Poly::default();
    let mut rows = Vec::new();

    // hours: w·(target − Σ paid·x)/target, linear under one shift per day
    let unit_hours = per(w[1], den.hours);
    objective.offset += unit_hours * total_target_minutes(inst) as f64;
    let unit_pref = per(w[2], den.preference);
    for a in &xs {
        let q = inst.duration(a.slot).unwrap_or(0);
        let paid = inst.params.paid_minutes(q);
        objective.add_linear(x_of[a], -unit_hours * f64::from(paid));
        if inst.is_preference_violation(a.collaborator, a.slot.site) {
            objective.add_linear(x_of[a], unit_pref);
        }
    }

    // site indicators
    let unit_site = per(w[0], den.multi_site);
    for c in 0..inst.n_collaborators() {
        for s in 0..inst.n_sites() {
            let group: Vec<usize> = xs
                .iter()
                .filter(|a| a.collaborator == c && a.slot.site == s)
                .map(|a| x_of[a])
                .collect();
            match group.len() {
                0 => {}
                1 => objective.add_linear(group[0], unit_site),
                n => {
                    let y = push(
                        &mut names,
                        format!("y[{c},{s}]"),
                        VarKind::Site {
                            collaborator: c,
                            site: s,
                        },
                    );
                    objective.add_linear(y, unit_site);
                    if n == 2 {
                        // x1·x2 + (x1 + x2)(1 − 2y) + y
                        let (a, b) = (group[0], group[1]);
                        violation.add_pair(a, b, 1.0);
                        for &x in &group {
                            violation.add_linear(x, 1.0);
                            violation.add_pair(x, y, -2.0);
                        }
                        violation.add_linear(y, 1.0);
                    } else {
                        // y ≥ each x, and Σx − y ≥ 0 through a slack
                        for &x in &group {
                            violation.add_linear(x, 1.0);
                            violation.add_pair(x, y, -1.0);
                        }
                        let weights = slack_weights(n as i64 - 1);
                        let slack: Vec<usize> = weights
                            .iter()
                            .enumerate()
                            .map(|(b, &wt)| {
                                push(&mut names, format!("ys[{c},{s}]#{b}"), VarKind::Slack { weight: wt })
                            })
                            .collect();
                        let mut terms: Vec<(usize, i64)> = group.iter().map(|&x| (x, 1)).collect();
                        terms.push((y, -1));
                        let mut sq = terms.clone();
                        sq.extend(slack.iter().zip(&weights).map(|(&i, &wt)| (i, -wt)));
                        violation.add_square(&sq, 0);
                        rows.push(EncodedRow {
                            terms,
                            sign: -1,
                            low: 0,
                            rhs: 0,
                            slack,
                        });
                    }
                }
            }
        }
    }

    // hard rows
    let set = ConstraintSet::new(inst);
    for (r, row) in set.constraints().iter().enumerate() {
        let raw = row.domain_terms(inst);
        let g = raw.iter().fold(0, |acc, t| gcd(acc, t.1)).max(1);
        let terms: Vec<(usize, i64)> = raw.iter().map(|(a, k)| (x_of[a], k / g)).collect();
        let max_lhs: i64 = terms.iter().map(|t| t.1.max(0)).sum();
        let label = match row.family {
            Family::Coverage => "cov",
            Family::OneShiftPerDay => "day",
            Family::KindergartenFemale => "kg",
            Family::WeeklyLimit => "cap",
        };
        match row.sense {
            Sense::AtMost => {
                let rhs = row.rhs.div_euclid(g);
                if max_lhs <= rhs {
                    continue;
                }
                if rhs == 1 && terms.iter().all(|t| t.1 == 1) {
                    // at most one: every pair is a violation
                    for (a, &(i, _)) in terms.iter().enumerate() {
                        for &(j, _) in &terms[a + 1..] {
                            violation.add_pair(i, j, 1.0);
                        }
                    }
                    continue;
                }
                // Σ k·x + s = rhs with s ∈ [low, rhs]
                let low = (rhs - max_lhs).max(0);
                let weights = slack_weights(rhs - low);
                let slack: Vec<usize> = weights
                    .iter()
                    .enumerate()
                    .map(|(b, &wt)| push(&mut names, format!("{label}{r}#{b}"), VarKind::Slack { weight: wt }))
                    .collect();
                let mut sq = terms.clone();
                sq.extend(slack.iter().zip(&weights).map(|(&i, &wt)| (i, wt)));
                violation.add_square(&sq, low - rhs);
                rows.push(EncodedRow {
                    terms,
                    sign: 1,
                    low,
                    rhs,
                    slack,
                });
            }
            Sense::AtLeast => {
                let rhs = (row.rhs + g - 1).div_euclid(g);
                // Σ k·x − s = rhs with s ∈ [0, max_lhs − rhs]
                let weights = slack_weights((max_lhs - rhs).max(0));
                let slack: Vec<usize> = weights
                    .iter()
                    .enumerate()
                    .map(|(b, &wt)| push(&mut names, format!("{label}{r}#{b}"), VarKind::Slack { weight: wt }))
                    .collect();
                let mut sq = terms.clone();
                sq.extend(slack.iter().zip(&weights).map(|(&i, &wt)| (i, -wt)));
                violation.add_square(&sq, -rhs);
                rows.push(EncodedRow {
                    terms,
                    sign: -1,
                    low: 0,
                    rhs,
                    slack,
                });
            }
        }
    }

    if names.len() > cap {
        return Err(QuboError::VariableCapExceeded {
            count: names.len(),
            cap,
        });
    }

    objective.prune();
    violation.prune();
    let mut combined = objective.clone();
    combined.offset += penalty * violation.offset;
    for (&i, &v) in &violation.linear {
        combined.add_linear(i, penalty * v);
    }
    for (&(i, j), &v) in &violation.quadratic {
        combined.add_pair(i, j, penalty * v);
    }
    combined.prune();
    let var_index = names.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
    Ok(QuboModel {
        names,
        kinds,
        var_index,
        linear: combined.linear,
        quadratic: combined.quadratic,
        offset: combined.offset,
        penalty_weight: penalty,
        objective,
        violation,
        rows,
    })
}

/// Reads the assignment bits into a schedule; other bits are ignored.
pub fn decode(bits: &[u8], model: &QuboModel, _inst: &Instance) -> Result<Schedule, QuboError> {
    model.check_len(bits)?;
    Ok(model
        .kinds
        .iter()
        .zip(bits)
        .filter_map(|(k, &b)| match k {
            VarKind::Assign(a) if b != 0 => Some(*a),
            _ => None,
        })
        .collect())
}

/// Minimum-energy bitstring by Gray-code enumeration. Ties go to the lowest
/// bit pattern, reading bit `i` as `2^i`.
pub fn brute_force_ground_state(model: &QuboModel) -> Result<(Vec<u8>, f64), QuboError> {
    let n = model.n_vars();
    if n > MAX_BRUTE_FORCE_VARIABLES {
        return Err(QuboError::TooManyVariables {
            count: n,
            limit: MAX_BRUTE_FORCE_VARIABLES,
        });
    }
    let mut h = vec![0.0; n];
    for (&i, &v) in &model.linear {
        h[i] = v;
    }
    let mut j = vec![0.0; n * n];
    for (&(a, b), &v) in &model.quadratic {
        j[a * n + b] = v;
        j[b * n + a] = v;
    }
    // local field of each variable given the current state
    let mut field = h.clone();
    let mut bits = vec![0u8; n];
    let mut pattern: u64 = 0;
    let mut e = model.offset;
    let mut best = (0u64, e);
    const TIE: f64 = 1e-9;

    let exact = |pattern: u64| {
        let b: Vec<u8> = (0..n).map(|i| u8::from(pattern >> i & 1 == 1)).collect();
        model.energy(&b).unwrap_or(f64::INFINITY)
    };
    for step in 1u64..(1u64 << n) {
        let i = step.trailing_zeros() as usize;
        let up = bits[i] == 0;
        e += if up { field[i] } else { -field[i] };
        bits[i] ^= 1;
        pattern ^= 1 << i;
        let sign = if up { 1.0 } else { -1.0 };
        let row = &j[i * n..i * n + n];
        for (f, &v) in field.iter_mut().zip(row) {
            *f += sign * v;
        }
        if step & 0xffff == 0 {
            e = exact(pattern);
        }
        if e < best.1 + TIE {
            let ex = exact(pattern);
            if ex < best.1 - TIE || (ex <= best.1 + TIE && pattern < best.0) {
                best = (pattern, ex);
            }
            e = ex;
        }
    }
    let out = (0..n).map(|i| u8::from(best.0 >> i & 1 == 1)).collect();
    Ok((out, best.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::build_real_case;
    use crate::model::{Collaborator, Contract, Gender, Level, Site, Timetable};
    use crate::objective::total_objective;

    fn toy() -> Instance {
        let sites = vec![
            Site::new("p", "A", Level::Primary),
            Site::new("s", "A", Level::Secondary),
        ];
        let collabs = vec![
            Collaborator::new("a", Gender::Male, Contract::FullTime),
            Collaborator::new("b", Gender::Female, Contract::FullTime),
        ];
        let mut inst = Instance::with_defaults(sites, collabs);
        inst.days.truncate(1);
        inst.shifts.truncate(1);
        inst.timetable = Timetable::empty(2, 1, 1);
        inst.timetable.set(0, 0, 0, Some("08:00-14:00".parse().unwrap()));
        inst.timetable.set(1, 0, 0, Some("08:00-13:00".parse().unwrap()));
        inst
    }

    #[test]
    fn slack_expansion_covers_range_exactly() {
        for r in 0..40 {
            let w = slack_weights(r);
            assert_eq!(w.iter().sum::<i64>(), r);
            for v in 0..=r {
                let bits = expand(v, &w);
                let got: i64 = bits.iter().map(|&(b, on)| w[b] * i64::from(on)).sum();
                assert_eq!(got, v, "range {r} value {v}");
            }
        }
    }

    #[test]
    fn toy_variable_count() {
        let m = encode_qubo(&toy(), 2.0).unwrap();
        let x = m.kinds.iter().filter(|k| matches!(k, VarKind::Assign(_))).count();
        assert_eq!(x, 4);
        // two coverage rows, one slack bit each; the day and cap rows are
        // slack-free or never binding, and single-slot sites need no y
        assert_eq!(m.n_vars(), 6);
        assert_eq!(m, encode_qubo(&toy(), 2.0).unwrap());
    }

    #[test]
    fn feasible_bits_have_zero_violation() {
        let inst = toy();
        let m = encode_qubo(&inst, 2.0).unwrap();
        let sch: Schedule = m
            .kinds
            .iter()
            .filter_map(|k| match k {
                VarKind::Assign(a) if a.collaborator == a.slot.site => Some(*a),
                _ => None,
            })
            .collect();
        let bits = m.bits_for(&sch);
        assert_eq!(m.violation(&bits).unwrap(), 0.0);
        assert_eq!(decode(&bits, &m, &inst).unwrap(), sch);
        let e = m.energy(&bits).unwrap();
        assert!((e - total_objective(&sch, &inst).total).abs() < 1e-12);
    }

    #[test]
    fn zero_bits_decode_empty() {
        let inst = toy();
        let m = encode_qubo(&inst, 2.0).unwrap();
        assert!(decode(&vec![0; m.n_vars()], &m, &inst).unwrap().is_empty());
        assert!(matches!(
            decode(&[0], &m, &inst),
            Err(QuboError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn penalty_bound_is_two() {
        let mut inst = toy();
        assert_eq!(min_penalty_bound(&inst), 2.0);
        inst.weights = crate::model::Weights([10.0, 7.0, 5.0]);
        assert_eq!(min_penalty_bound(&inst), 2.0);
    }

    #[test]
    fn real_case_exceeds_cap() {
        let err = encode_qubo(&build_real_case(), 2.0).unwrap_err();
        assert!(matches!(err, QuboError::VariableCapExceeded { count, cap: 64 } if count > 64));
    }

    fn model_from(linear: &[(usize, f64)], n: usize) -> QuboModel {
        QuboModel {
            names: (0..n).map(|i| format!("v{i}")).collect(),
            kinds: vec![VarKind::Slack { weight: 1 }; n],
            var_index: BTreeMap::new(),
            linear: linear.iter().copied().collect(),
            quadratic: BTreeMap::new(),
            offset: 0.5,
            penalty_weight: 1.0,
            objective: Poly::default(),
            violation: Poly::default(),
            rows: Vec::new(),
        }
    }

    #[test]
    fn ground_state_of_single_variable() {
        let (bits, e) = brute_force_ground_state(&model_from(&[(0, 1.0)], 1)).unwrap();
        assert_eq!((bits, e), (vec![0], 0.5));
    }

    #[test]
    fn ground_state_tie_takes_lowest_pattern() {
        // v0 and v1 both lower the energy by one; v2 is free
        let (bits, e) = brute_force_ground_state(&model_from(&[(0, -1.0), (1, -1.0)], 3)).unwrap();
        assert_eq!(bits, vec![1, 1, 0]);
        assert_eq!(e, -1.5);
    }

    #[test]
    fn too_many_variables() {
        let err = brute_force_ground_state(&model_from(&[], 25)).unwrap_err();
        assert_eq!(
            err,
            QuboError::TooManyVariables {
                count: 25,
                limit: 24
            }
        );
    }
}
