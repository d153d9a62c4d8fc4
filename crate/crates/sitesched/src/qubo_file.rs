//! Sparse QUBO text file.
//!
//! ```text
//! # qubo variables=3 penalty=2 offset=1.5
//! # var 0 x[0,0,0,0]
//! # var 1 x[1,0,0,0]
//! # var 2 cov0#0
//! 0 0 -0.25
//! 0 1 4
//! ```
//!
//! `i i c` is a linear coefficient, `i j c` with `i < j` a quadratic one.
//! Numbers use the shortest text that reads back to the same `f64`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sitesched_core::qubo::QuboModel;

use crate::FormatError;

/// A QUBO as read back from a file: names and coefficients only.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseQubo {
    pub names: Vec<String>,
    pub linear: BTreeMap<usize, f64>,
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
    pub penalty_weight: f64,
}

impl SparseQubo {
    pub fn energy(&self, bits: &[u8]) -> f64 {
        let on = |i: usize| bits.get(i).copied().unwrap_or(0) != 0;
        let mut e = self.offset;
        for (&i, &v) in &self.linear {
            if on(i) {
                e += v;
            }
        }
        for (&(i, j), &v) in &self.quadratic {
            if on(i) && on(j) {
                e += v;
            }
        }
        e
    }
}

impl From<&QuboModel> for SparseQubo {
    fn from(m: &QuboModel) -> Self {
        Self {
            names: m.names.clone(),
            linear: m.linear.clone(),
            quadratic: m.quadratic.clone(),
            offset: m.offset,
            penalty_weight: m.penalty_weight,
        }
    }
}

pub fn qubo_to_text(q: &SparseQubo) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# qubo variables={} penalty={:?} offset={:?}",
        q.names.len(),
        q.penalty_weight,
        q.offset
    );
    for (i, name) in q.names.iter().enumerate() {
        let _ = writeln!(out, "# var {i} {name}");
    }
    for (&i, &v) in &q.linear {
        let _ = writeln!(out, "{i} {i} {v:?}");
    }
    for (&(i, j), &v) in &q.quadratic {
        let _ = writeln!(out, "{i} {j} {v:?}");
    }
    out
}

fn bad(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::Schema {
        path: format!("line {line}"),
        reason: reason.into(),
    }
}

pub fn parse_qubo(text: &str) -> Result<SparseQubo, FormatError> {
    let mut q = SparseQubo {
        names: Vec::new(),
        linear: BTreeMap::new(),
        quadratic: BTreeMap::new(),
        offset: 0.0,
        penalty_weight: 0.0,
    };
    let mut declared = None;
    for (k, line) in text.lines().enumerate() {
        let n = k + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# qubo") {
            for field in rest.split_whitespace() {
                let (key, value) = field
                    .split_once('=')
                    .ok_or_else(|| bad(n, format!("expected key=value, got {field:?}")))?;
                let num = |v: &str| v.parse::<f64>().map_err(|e| bad(n, format!("{key}: {e}")));
                match key {
                    "variables" => declared = Some(num(value)? as usize),
                    "penalty" => q.penalty_weight = num(value)?,
                    "offset" => q.offset = num(value)?,
                    _ => return Err(bad(n, format!("unknown header field {key:?}"))),
                }
            }
        } else if let Some(rest) = line.strip_prefix("# var ") {
            let (idx, name) = rest
                .split_once(' ')
                .ok_or_else(|| bad(n, "expected `# var <index> <name>`"))?;
            let idx: usize = idx.parse().map_err(|_| bad(n, "bad variable index"))?;
            if idx != q.names.len() {
                return Err(bad(n, format!("variable {idx} out of order")));
            }
            q.names.push(name.to_string());
        } else if line.starts_with('#') {
            continue;
        } else {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [i, j, v] = parts[..] else {
                return Err(bad(n, "expected `i j coeff`"));
            };
            let i: usize = i.parse().map_err(|_| bad(n, "bad index"))?;
            let j: usize = j.parse().map_err(|_| bad(n, "bad index"))?;
            let v: f64 = v.parse().map_err(|_| bad(n, "bad coefficient"))?;
            match i.cmp(&j) {
                std::cmp::Ordering::Equal => *q.linear.entry(i).or_insert(0.0) += v,
                std::cmp::Ordering::Less => *q.quadratic.entry((i, j)).or_insert(0.0) += v,
                std::cmp::Ordering::Greater => *q.quadratic.entry((j, i)).or_insert(0.0) += v,
            }
        }
    }
    let count = declared.unwrap_or(q.names.len());
    if q.names.len() != count {
        return Err(bad(0, format!("header declares {count} variables, table has {}", q.names.len())));
    }
    let max_index = q
        .linear
        .keys()
        .copied()
        .chain(q.quadratic.keys().map(|k| k.1))
        .max();
    if let Some(m) = max_index.filter(|&m| m >= count) {
        return Err(bad(0, format!("coefficient on variable {m}, only {count} declared")));
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sitesched_core::instances::{generate_toy, ToySpec};
    use sitesched_core::qubo::encode_qubo;

    #[test]
    fn round_trip_keeps_every_coefficient() {
        let inst = generate_toy(3, &ToySpec::default());
        let m = encode_qubo(&inst, 2.0).unwrap();
        let q = SparseQubo::from(&m);
        let back = parse_qubo(&qubo_to_text(&q)).unwrap();
        assert_eq!(back, q);
        let bits = vec![1u8; m.n_vars()];
        assert_eq!(back.energy(&bits), m.energy(&bits).unwrap());
    }

    #[test]
    fn rejects_out_of_range_index() {
        let err = parse_qubo("# qubo variables=1 penalty=2 offset=0\n# var 0 a\n0 3 1.0\n").unwrap_err();
        assert!(err.to_string().contains("variable 3"));
    }
}
