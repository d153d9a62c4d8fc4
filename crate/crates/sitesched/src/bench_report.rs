//! CSV and plain-text renderings of a [`BenchReport`].
//!
//! Columns follow the usual results table: objective mean and standard
//! deviation, time mean and standard deviation, share of runs at the
//! optimum. A size with no feasible run shows `--` for the objective
//! statistics, and an infeasible exact incumbent shows `--` as reference;
//! `n/a` in `pct_optimal` means the exact reference did not finish within
//! its time limit.

use std::fmt::Write as _;
use std::io::Write;

use sitesched_core::solvers::{BenchReport, BenchRow};

use crate::FormatError;

pub const CSV_HEADER: [&str; 11] = [
    "n_collab",
    "obj_mean",
    "obj_std",
    "time_mean_s",
    "time_std_s",
    "pct_optimal",
    "runs",
    "feasible_runs",
    "instance_seed",
    "reference",
    "reference_proven",
];

fn cells(r: &BenchRow) -> [String; 11] {
    let obj = |v: f64| {
        if r.feasible_runs == 0 {
            "--".to_string()
        } else {
            format!("{v:.6}")
        }
    };
    [
        r.n_collab.to_string(),
        obj(r.obj_mean),
        obj(r.obj_std),
        format!("{:.4}", r.time_mean_s),
        format!("{:.4}", r.time_std_s),
        r.pct_optimal.map_or_else(|| "n/a".to_string(), |p| format!("{p:.0}")),
        r.runs.to_string(),
        r.feasible_runs.to_string(),
        r.instance_seed.to_string(),
        if r.reference_feasible {
            format!("{:.6}", r.reference)
        } else {
            "--".to_string()
        },
        r.reference_proven.to_string(),
    ]
}

pub fn write_bench_csv<W: Write>(report: &BenchReport, out: W) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &report.rows {
        w.write_record(cells(row))?;
    }
    w.flush().map_err(|e| FormatError::Csv(e.to_string()))?;
    Ok(())
}

pub fn bench_table(report: &BenchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>8} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "n_collab", "obj_mean", "obj_std", "time_mean", "time_std", "%optimal"
    );
    for r in &report.rows {
        let c = cells(r);
        let pct = if c[5] == "n/a" { c[5].clone() } else { format!("{}%", c[5]) };
        let _ = writeln!(
            out,
            "{:>8} {:>10} {:>10} {:>10} {:>10} {:>10}",
            c[0], c[1], c[2], c[3], c[4], pct
        );
    }
    for (n, cause) in &report.failures {
        let _ = writeln!(out, "{n:>8} failed: {cause}");
    }
    out
}
