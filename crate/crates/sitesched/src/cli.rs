//! Command-line front end.
//!
//! Exit codes: 0 success or feasible result, 1 infeasible result, 2 usage or
//! input error, 3 internal error.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;
use sitesched_core::feasibility::{verify, ViolationReport};
use sitesched_core::instances::{build_real_case, generate_synthetic, GeneratorConfig};
use sitesched_core::model::{
    validate_instance, Instance, PreferenceDenominator, PreferenceScope, Weights,
};
use sitesched_core::qubo::{encode_qubo_with_cap, min_penalty_bound, DEFAULT_VARIABLE_CAP};
use sitesched_core::solvers::{
    bench, brute_force_oracle, exact_branch_bound, greedy_construct, simulated_anneal,
    BenchConfig, SaParams, SolveResult,
};
use thiserror::Error;

use crate::bench_report::{bench_table, write_bench_csv};
use crate::instance_file::{instance_to_json, load_instance, save_instance};
use crate::qubo_file::{qubo_to_text, SparseQubo};
use crate::real_case::{self, Settings, Variant};
use crate::run_log::{instance_hash, RunLog, SystemClock};
use crate::schedule_csv::{load_schedule, save_schedule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

fn internal(e: impl ToString) -> CliError {
    CliError::Internal(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "sitesched", version, about = "Weekly rostering of school staff across sites")]
pub struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic instance as JSON.
    Generate(GenerateArgs),
    /// Solve an instance; writes the schedule CSV, a breakdown JSON and a run log.
    Solve(SolveArgs),
    /// Check a schedule against the hard constraints; exit 0 iff none is violated.
    Verify(VerifyArgs),
    /// Annealing runs on generated instances, compared with the exact optimum.
    Bench(BenchArgs),
    /// Export an instance as canonical JSON or as a sparse QUBO.
    Export(ExportArgs),
    /// Solve the built-in school network under every objective reading.
    RealCase(RealCaseArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Instance JSON file.
    #[arg(short, long)]
    pub instance: Option<PathBuf>,
    /// Use the built-in school network instead of a file.
    #[arg(long)]
    pub real_case: bool,
}

/// Switches between readings of the objective. They override the instance.
#[derive(Debug, Clone, Default, Args)]
pub struct InterpretationArgs {
    /// Normalize the preference term by |C|·|D|·|J| instead of |C|·|S|·|D|·|J|.
    #[arg(long)]
    pub alt_pref_denominator: bool,
    /// Use the weights as given instead of scaling them to sum 1.
    #[arg(long)]
    pub raw_weights: bool,
    /// Penalize every assignment of collaborators with neither binding nor preferred sites.
    #[arg(long, conflicts_with = "pref_literal")]
    pub pref_penalize_all: bool,
    /// Only declared preferences exempt an assignment; binding sites do not.
    #[arg(long)]
    pub pref_literal: bool,
    /// Unpaid break, in minutes, of shifts longer than the break threshold [default: from instance].
    #[arg(long)]
    pub break_minutes: Option<u32>,
    /// Objective weights for multi-site, hours deviation and preference, e.g. 0.5,0.3,0.2 [default: from instance].
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
}

impl InterpretationArgs {
    pub fn apply(&self, inst: &mut Instance) -> Result<(), CliError> {
        if let Some(w) = &self.weights {
            let [a, b, c] = w[..] else {
                return Err(usage(format!("--weights needs 3 values, got {}", w.len())));
            };
            let w = Weights([a, b, c]);
            if !w.is_valid() {
                return Err(usage("--weights must be finite, nonnegative and not all zero"));
            }
            inst.weights = w;
        }
        let it = &mut inst.interpretation;
        if self.alt_pref_denominator {
            it.preference_denominator = PreferenceDenominator::CollabDayShift;
        }
        if self.raw_weights {
            it.raw_weights = true;
        }
        if self.pref_penalize_all {
            it.preference_scope = PreferenceScope::PenalizeUndeclared;
        }
        if self.pref_literal {
            it.preference_scope = PreferenceScope::Literal;
        }
        if let Some(m) = self.break_minutes {
            inst.params.break_minutes = m;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of collaborators (at least 4).
    #[arg(short, long)]
    pub n_collab: usize,
    /// Generator seed [default: drawn from the clock and logged].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output JSON path.
    #[arg(short, long, default_value = "instance.json")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Greedy,
    Sa,
    Exact,
    Oracle,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub interpretation: InterpretationArgs,
    #[arg(long, value_enum, default_value_t = SolverKind::Sa)]
    pub solver: SolverKind,
    /// Seed for greedy tie-breaking and annealing [default: drawn from the clock and logged].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Time limit in seconds (annealing and exact search).
    #[arg(long, default_value_t = 60.0)]
    pub time_limit: f64,
    /// Schedule CSV path; the breakdown and run log go next to it as
    /// <stem>.breakdown.json and <stem>.log.json.
    #[arg(short, long, default_value = "schedule.csv")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: Source,
    /// Schedule CSV to check.
    #[arg(short, long)]
    pub schedule: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Instance sizes (collaborators).
    #[arg(long, value_delimiter = ',', default_value = "25,30,35,40")]
    pub sizes: Vec<usize>,
    /// Annealing runs per size.
    #[arg(long, default_value_t = 5)]
    pub runs: u32,
    /// Base seed; size n uses instance seed base+n [default: drawn from the clock and logged].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Time limit per annealing run, seconds.
    #[arg(long, default_value_t = 5.0)]
    pub time_limit: f64,
    /// Time limit of the exact reference per size, seconds.
    #[arg(long, default_value_t = 60.0)]
    pub exact_time_limit: f64,
    /// Report CSV path.
    #[arg(short, long, default_value = "bench.csv")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Json,
    Qubo,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub interpretation: InterpretationArgs,
    #[arg(long, value_enum, default_value_t = ExportFormat::Json)]
    pub format: ExportFormat,
    /// QUBO penalty weight [default: the sufficient bound, 2].
    #[arg(long)]
    pub penalty: Option<f64>,
    /// Largest QUBO accepted, in binary variables.
    #[arg(long, default_value_t = DEFAULT_VARIABLE_CAP)]
    pub variable_cap: usize,
    /// Output path.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct RealCaseArgs {
    /// Exact search time limit for the default reading, seconds.
    #[arg(long, default_value_t = 300.0)]
    pub time_limit: f64,
    /// Exact search time limit for each alternate reading, seconds.
    #[arg(long, default_value_t = 30.0)]
    pub alt_time_limit: f64,
    /// Annealing runs per reading; the best is reported.
    #[arg(long, default_value_t = 5)]
    pub sa_runs: u32,
    /// First annealing seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Solve the default reading only.
    #[arg(long)]
    pub default_only: bool,
    /// Write the results as JSON here.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Runs a parsed command and returns the exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Export(a) => export(a),
        Command::RealCase(a) => real_case_cmd(a),
    }
}

fn seed_or_clock(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos() as u64);
        warn!("no --seed given, using {s}");
        s
    })
}

fn load(source: &Source) -> Result<Instance, CliError> {
    let inst = match &source.instance {
        Some(path) => {
            let (inst, warnings) = load_instance(path).map_err(usage)?;
            for w in warnings {
                warn!("{w}");
            }
            inst
        }
        None => build_real_case(),
    };
    for d in validate_instance(&inst) {
        warn!("instance: {d}");
    }
    Ok(inst)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| internal(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

/// `dir/stem.csv` → `dir/stem.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "schedule".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn generate(a: GenerateArgs) -> Result<i32, CliError> {
    let seed = seed_or_clock(a.seed);
    let inst = generate_synthetic(&GeneratorConfig::new(a.n_collab, seed)).map_err(usage)?;
    save_instance(&inst, &a.output).map_err(internal)?;
    println!(
        "wrote {} (seed {seed}, {} collaborators, {} sites)",
        a.output.display(),
        inst.n_collaborators(),
        inst.n_sites()
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    solver: SolverKind,
    feasible: bool,
    proven_optimal: bool,
    violations: usize,
    breakdown: &'a sitesched_core::objective::ObjectiveBreakdown,
}

fn solve(a: SolveArgs) -> Result<i32, CliError> {
    let mut inst = load(&a.source)?;
    a.interpretation.apply(&mut inst)?;
    if a.time_limit.is_nan() || a.time_limit < 0.0 {
        return Err(usage("--time-limit must be nonnegative"));
    }
    let seed = match a.solver {
        SolverKind::Greedy | SolverKind::Sa => seed_or_clock(a.seed),
        SolverKind::Exact | SolverKind::Oracle => a.seed.unwrap_or(0),
    };
    let clock = SystemClock::start();
    let sa = SaParams {
        seed,
        time_limit_seconds: a.time_limit,
        ..SaParams::default()
    };
    info!("solving with {:?}", a.solver);
    let result: SolveResult = match a.solver {
        SolverKind::Greedy => greedy_construct(&inst, seed),
        SolverKind::Sa => simulated_anneal(&inst, &sa, &clock),
        SolverKind::Exact => exact_branch_bound(&inst, a.time_limit, &clock),
        SolverKind::Oracle => brute_force_oracle(&inst).map_err(usage)?,
    };

    let report = verify(&result.schedule, &inst);
    if report.is_feasible() != result.feasible {
        return Err(internal(format!(
            "solver claims feasible={} but the checker found {} violations",
            result.feasible,
            report.len()
        )));
    }

    save_schedule(&result.schedule, &inst, &a.output).map_err(internal)?;
    let summary = SolveSummary {
        solver: a.solver,
        feasible: result.feasible,
        proven_optimal: result.proven_optimal,
        violations: report.len(),
        breakdown: &result.breakdown,
    };
    write_text(&sibling(&a.output, "breakdown.json"), &to_json(&summary))?;
    let solver_params = match a.solver {
        SolverKind::Sa => serde_json::to_value(sa).expect("plain data serializes"),
        _ => serde_json::Value::Null,
    };
    let log = RunLog {
        solver: format!("{:?}", a.solver).to_lowercase(),
        seed,
        time_limit_s: a.time_limit,
        instance_sha256: instance_hash(&inst),
        params: inst.params,
        weights: inst.weights,
        interpretation: inst.interpretation,
        solver_params,
        elapsed_s: result.elapsed_seconds,
        feasible: result.feasible,
        proven_optimal: result.proven_optimal,
        iterations: result.iterations,
        breakdown: result.breakdown,
    };
    write_text(&sibling(&a.output, "log.json"), &to_json(&log))?;

    print!("{}", to_json(&summary));
    if result.feasible {
        Ok(EXIT_OK)
    } else {
        print_report(&report);
        Ok(EXIT_INFEASIBLE)
    }
}

fn print_report(report: &ViolationReport) {
    let mut out = std::io::stdout().lock();
    for v in &report.violations {
        let _ = writeln!(out, "{}: {}", v.kind.as_str(), v.detail);
    }
    let _ = writeln!(out, "{} violation(s)", report.len());
}

fn verify_cmd(a: VerifyArgs) -> Result<i32, CliError> {
    let inst = load(&a.source)?;
    let sch = load_schedule(&a.schedule, &inst).map_err(usage)?;
    let report = verify(&sch, &inst);
    if a.json {
        print!("{}", to_json(&report));
    } else {
        print_report(&report);
    }
    Ok(if report.is_feasible() { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn bench_cmd(a: BenchArgs) -> Result<i32, CliError> {
    if a.sizes.is_empty() {
        return Err(usage("--sizes is empty"));
    }
    let seed = seed_or_clock(a.seed);
    let mut cfg = BenchConfig::new(a.sizes, a.runs, seed);
    cfg.sa.time_limit_seconds = a.time_limit;
    cfg.exact_time_limit_s = a.exact_time_limit;
    let report = bench(&cfg, &SystemClock::start());
    let f = fs::File::create(&a.output).map_err(|e| internal(format!("{}: {e}", a.output.display())))?;
    write_bench_csv(&report, f).map_err(internal)?;
    print!("{}", bench_table(&report));
    println!("base seed {seed}; wrote {}", a.output.display());
    Ok(EXIT_OK)
}

fn export(a: ExportArgs) -> Result<i32, CliError> {
    let mut inst = load(&a.source)?;
    a.interpretation.apply(&mut inst)?;
    match a.format {
        ExportFormat::Json => write_text(&a.output, &instance_to_json(&inst))?,
        ExportFormat::Qubo => {
            let penalty = a.penalty.unwrap_or_else(|| min_penalty_bound(&inst));
            let model = encode_qubo_with_cap(&inst, penalty, a.variable_cap).map_err(usage)?;
            write_text(&a.output, &qubo_to_text(&SparseQubo::from(&model)))?;
            println!("{} variables, penalty {penalty}", model.n_vars());
        }
    }
    println!("wrote {}", a.output.display());
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RealCaseLog<'a> {
    structure: real_case::Structure,
    reported_total: f64,
    tolerance: f64,
    outcomes: &'a [real_case::VariantOutcome],
    closest: Option<&'a real_case::VariantOutcome>,
    gate_passed: bool,
}

fn fmt_run(r: &real_case::RunSummary) -> String {
    if !r.feasible {
        return format!("infeasible ({:.1}s)", r.elapsed_s);
    }
    let proof = if r.proven_optimal { ", proven" } else { "" };
    format!(
        "{:.6} [{:.6} {:.6} {:.6}{proof}, {:.1}s]",
        r.total, r.multi_site, r.hours_deviation, r.preference, r.elapsed_s
    )
}

fn real_case_cmd(a: RealCaseArgs) -> Result<i32, CliError> {
    let inst = build_real_case();
    let s = real_case::structure(&inst);
    println!(
        "real case: {} sites, {} collaborators ({} female, {} part-time), {} active slots, \
         {} binding rows, {} preference rows, weights {:?}",
        s.sites, s.collaborators, s.female, s.part_time, s.active_slots, s.binding_rows,
        s.preference_rows, s.weights
    );
    println!(
        "target {:.6} ± {:.0e}; totals as total [multi-site hours preference]",
        real_case::REPORTED_TOTAL,
        real_case::MATCH_TOLERANCE
    );
    let variants = if a.default_only {
        vec![Variant::default_reading()]
    } else {
        Variant::all()
    };
    let clock = SystemClock::start();
    let mut outcomes = Vec::with_capacity(variants.len());
    for (i, v) in variants.into_iter().enumerate() {
        let settings = Settings {
            exact_time_limit_s: if i == 0 { a.time_limit } else { a.alt_time_limit },
            sa_runs: a.sa_runs,
            sa_seed: a.seed,
            sa_time_limit_s: SaParams::default().time_limit_seconds,
        };
        let o = real_case::run_variant(&inst, v, &settings, &clock);
        println!("{}", o.label);
        println!("  exact {}", fmt_run(&o.exact));
        println!("  sa    {} (best of {})", fmt_run(&o.sa_best), o.sa_runs);
        println!("  match {}", if o.matched() { "yes" } else { "no" });
        outcomes.push(o);
    }
    let default = &outcomes[0].exact;
    let gate_passed = default.feasible && default.total <= real_case::GATE_TOTAL;
    let closest = real_case::closest(&outcomes);
    if let Some(c) = closest {
        println!(
            "closest: {} exact {:.6} (gap {:.6})",
            c.label,
            c.exact.total,
            (c.exact.total - real_case::REPORTED_TOTAL).abs()
        );
    }
    println!(
        "default reading feasible with total <= {}: {}",
        real_case::GATE_TOTAL,
        if gate_passed { "yes" } else { "no" }
    );
    if let Some(path) = &a.output {
        let log = RealCaseLog {
            structure: s,
            reported_total: real_case::REPORTED_TOTAL,
            tolerance: real_case::MATCH_TOLERANCE,
            outcomes: &outcomes,
            closest,
            gate_passed,
        };
        write_text(path, &to_json(&log))?;
    }
    Ok(if gate_passed { EXIT_OK } else { EXIT_INFEASIBLE })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn literal_conflicts_with_penalize_all() {
        let r = Cli::try_parse_from([
            "sitesched", "solve", "--real-case", "--pref-literal", "--pref-penalize-all",
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn source_is_required() {
        assert!(Cli::try_parse_from(["sitesched", "solve"]).is_err());
    }

    #[test]
    fn weights_need_three_values() {
        let a = InterpretationArgs {
            weights: Some(vec![1.0, 2.0]),
            ..Default::default()
        };
        let err = a.apply(&mut build_real_case()).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn flags_map_onto_interpretation() {
        let a = InterpretationArgs {
            alt_pref_denominator: true,
            pref_literal: true,
            break_minutes: Some(60),
            ..Default::default()
        };
        let mut inst = build_real_case();
        a.apply(&mut inst).unwrap();
        assert_eq!(inst.interpretation.preference_scope, PreferenceScope::Literal);
        assert_eq!(
            inst.interpretation.preference_denominator,
            PreferenceDenominator::CollabDayShift
        );
        assert_eq!(inst.params.break_minutes, 60);
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("out/run.csv"), "log.json"), PathBuf::from("out/run.log.json"));
    }
}
