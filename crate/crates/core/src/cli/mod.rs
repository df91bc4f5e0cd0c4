//! The `ragap` command line.
//!
//! [`dispatch`] parses arguments and returns the exit code together with
//! everything that would go to stdout and stderr, so the binary is a thin
//! wrapper and the commands are testable in-process.

mod bench;
mod estimate;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::config_lp::{ConfigLp, ConfigLpError};
use crate::dual_witness::certify_stuck;
use crate::instance::{generate_random, Instance, Rational, SizeProfile};
use crate::local_search::{run, InsertionOrder, JsonTrace, RunOutcome, SearchOptions};
use crate::oracle::{brute_force_opt, OracleError};

pub use bench::{bench_corpus, bench_instance, corpus_files, BenchRow, CSV_HEADER};
pub use estimate::{estimate, Estimate, EstimateError, EstimateFile, Probe};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_STUCK: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_GUARD: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CliOutput {
    fn ok(stdout: String) -> Self {
        CliOutput {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: impl Into<String>) -> Self {
        let mut stderr = stderr.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        CliOutput {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "ragap",
    version,
    about = "Restricted Assignment: configuration-LP, local search and certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded random instance.
    Gen {
        #[arg(long)]
        machines: usize,
        #[arg(long)]
        jobs: usize,
        #[arg(long)]
        seed: u64,
        /// Probability that a non-anchor machine is allowed.
        #[arg(long, default_value = "2/3")]
        density: Rational,
        /// `k` for {1/k, ..., k/k}, or a comma separated list of sizes.
        #[arg(long, default_value = "6")]
        sizes: String,
    },
    /// Configuration-LP feasibility at T, or OPT* when T is omitted.
    Lp {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "T")]
        t: Option<Rational>,
    },
    /// Run the local search at target makespan T.
    Schedule {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "T")]
        t: Rational,
        /// desc, input or shuffle:SEED
        #[arg(long, default_value = "desc")]
        order: InsertionOrder,
        #[arg(long)]
        debug_invariants: bool,
        /// Write line-delimited JSON events here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Binary search over subset sums for the smallest completing T.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "desc")]
        order: InsertionOrder,
    },
    /// Check a schedule file against its instance.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        /// Also compare with the brute-force optimum.
        #[arg(long)]
        exact: bool,
    },
    /// CSV summary over a directory of instance files.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
}

/// Parses `argv` (including the program name) and runs the command.
pub fn dispatch<I, T>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                CliOutput::fail(EXIT_VALIDATION, rendered)
            } else {
                CliOutput::ok(rendered)
            };
        }
    };
    match cli.command {
        Command::Gen {
            machines,
            jobs,
            seed,
            density,
            sizes,
        } => cmd_gen(machines, jobs, seed, &density, &sizes),
        Command::Lp { input, t } => cmd_lp(&input, t.as_ref()),
        Command::Schedule {
            input,
            t,
            order,
            debug_invariants,
            trace,
        } => cmd_schedule(&input, &t, order, debug_invariants, trace.as_deref()),
        Command::Estimate { input, order } => cmd_estimate(&input, order),
        Command::Verify { input, schedule, exact } => cmd_verify(&input, &schedule, exact),
        Command::Bench { corpus, parallel } => cmd_bench(&corpus, parallel),
    }
}

fn pretty<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json output");
    s.push('\n');
    s
}

fn load_instance(path: &Path) -> Result<Instance, CliOutput> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliOutput::fail(EXIT_VALIDATION, format!("{}: {e}", path.display())))?;
    Instance::from_json(&text).map_err(|e| CliOutput::fail(EXIT_VALIDATION, format!("{}: {e}", path.display())))
}

fn parse_sizes(arg: &str) -> Result<SizeProfile, String> {
    if let Ok(k) = arg.parse::<i64>() {
        if k < 1 {
            return Err(format!("grid resolution must be positive, got {k}"));
        }
        return Ok(SizeProfile::uniform_grid(k));
    }
    let grid = arg
        .split(',')
        .map(|s| s.trim().parse::<Rational>().map_err(|e| format!("size `{s}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SizeProfile { grid })
}

fn cmd_gen(machines: usize, jobs: usize, seed: u64, density: &Rational, sizes: &str) -> CliOutput {
    let profile = match parse_sizes(sizes) {
        Ok(p) => p,
        Err(e) => return CliOutput::fail(EXIT_VALIDATION, e),
    };
    match generate_random(machines, jobs, &profile, density, seed) {
        Ok(inst) => CliOutput::ok(inst.to_json() + "\n"),
        Err(e) => CliOutput::fail(EXIT_VALIDATION, e.to_string()),
    }
}

fn lp_error(e: ConfigLpError) -> CliOutput {
    let code = match e {
        ConfigLpError::GuardExceeded { .. } => EXIT_GUARD,
        ConfigLpError::NegativeTarget(_) => EXIT_VALIDATION,
        _ => EXIT_INTERNAL,
    };
    CliOutput::fail(code, e.to_string())
}

fn cmd_lp(input: &Path, t: Option<&Rational>) -> CliOutput {
    let inst = match load_instance(input) {
        Ok(i) => i,
        Err(out) => return out,
    };
    let lp = ConfigLp::default();
    match t {
        Some(t) => match lp.lp_feasible(&inst, t) {
            Ok(res) => CliOutput::ok(pretty(&res.to_json_value(&inst))),
            Err(e) => lp_error(e),
        },
        None => match lp.opt_star_with_solution(&inst) {
            Ok(res) => CliOutput::ok(pretty(&json!({
                "opt_star": res.t.clone(),
                "lp": res.to_json_value(&inst),
            }))),
            Err(e) => lp_error(e),
        },
    }
}

fn cmd_schedule(
    input: &Path,
    t: &Rational,
    order: InsertionOrder,
    debug_invariants: bool,
    trace: Option<&Path>,
) -> CliOutput {
    let inst = match load_instance(input) {
        Ok(i) => i,
        Err(out) => return out,
    };
    if !t.is_positive() {
        return CliOutput::fail(EXIT_VALIDATION, format!("T must be positive, got {t}"));
    }
    let opts = SearchOptions {
        debug_invariants,
        ..Default::default()
    };
    let outcome = match trace {
        Some(path) => {
            let file = match File::create(path) {
                Ok(f) => f,
                Err(e) => return CliOutput::fail(EXIT_VALIDATION, format!("{}: {e}", path.display())),
            };
            let mut tracer = JsonTrace::new(BufWriter::new(file), &inst.scale(t).expect("positive T"));
            let outcome = run(&inst, t, order, &opts, &mut tracer);
            if let Err(e) = std::io::Write::flush(&mut tracer.into_inner()) {
                return CliOutput::fail(EXIT_INTERNAL, format!("{}: {e}", path.display()));
            }
            outcome
        }
        None => run(&inst, t, order, &opts, &mut ()),
    };
    match outcome {
        Err(e) => CliOutput::fail(EXIT_INTERNAL, e.to_string()),
        Ok(RunOutcome::Complete(s)) => CliOutput::ok(pretty(&s.to_file(&inst))),
        Ok(RunOutcome::Stuck { stuck, .. }) => match certify_stuck(&stuck) {
            Ok(cert) if cert.holds() => CliOutput {
                code: EXIT_STUCK,
                stdout: pretty(&cert.to_file(&stuck)),
                stderr: format!("stuck at T = {t}: configuration-LP certified infeasible\n"),
            },
            Ok(cert) => CliOutput {
                code: EXIT_INTERNAL,
                stdout: pretty(&cert.to_file(&stuck)),
                stderr: format!("stuck at T = {t} but the certificate does not hold\n"),
            },
            Err(e) => CliOutput::fail(EXIT_INTERNAL, e.to_string()),
        },
    }
}

fn cmd_estimate(input: &Path, order: InsertionOrder) -> CliOutput {
    let inst = match load_instance(input) {
        Ok(i) => i,
        Err(out) => return out,
    };
    match estimate(&inst, order, &SearchOptions::default()) {
        Ok(est) => CliOutput::ok(pretty(&est.to_file(&inst))),
        Err(e) => CliOutput::fail(EXIT_INTERNAL, e.to_string()),
    }
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    valid: bool,
    loads: Vec<Rational>,
    makespan: Option<Rational>,
    /// Input positions of jobs placed outside their allowed machines.
    offending_jobs: Vec<usize>,
    errors: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    opt: Option<Rational>,
}

fn cmd_verify(input: &Path, schedule: &Path, exact: bool) -> CliOutput {
    let inst = match load_instance(input) {
        Ok(i) => i,
        Err(out) => return out,
    };
    let raw = match std::fs::read_to_string(schedule) {
        Ok(t) => t,
        Err(e) => return CliOutput::fail(EXIT_VALIDATION, format!("{}: {e}", schedule.display())),
    };
    let file: crate::local_search::ScheduleFile = match serde_json::from_str(&raw) {
        Ok(f) => f,
        Err(e) => return CliOutput::fail(EXIT_VALIDATION, format!("{}: {e}", schedule.display())),
    };

    let mut report = VerifyReport {
        valid: true,
        loads: vec![Rational::zero(); inst.machine_count()],
        makespan: None,
        offending_jobs: Vec::new(),
        errors: Vec::new(),
        opt: None,
    };
    let map = inst.original_to_canonical();
    if file.assignment.len() != inst.job_count() {
        report.errors.push(format!(
            "assignment lists {} jobs, instance has {}",
            file.assignment.len(),
            inst.job_count()
        ));
    } else {
        for (pos, &machine) in file.assignment.iter().enumerate() {
            let j = map[pos];
            if !inst.allows(j, machine) {
                report.offending_jobs.push(pos);
                report.errors.push(format!(
                    "job {pos} is assigned to machine {machine}, outside its allowed set"
                ));
            } else {
                report.loads[machine] += inst.p(j);
            }
        }
    }
    if report.errors.is_empty() {
        let makespan = report.loads.iter().cloned().fold(Rational::zero(), Rational::max);
        if makespan != file.makespan {
            report.errors.push(format!(
                "makespan field {} differs from recomputed {makespan}",
                file.makespan
            ));
        }
        let bound = &file.ratio_bound * &file.t;
        if makespan > bound {
            report
                .errors
                .push(format!("makespan {makespan} exceeds ratio_bound * T = {bound}"));
        }
        if exact {
            match brute_force_opt(&inst) {
                Ok(res) => {
                    let limit = &file.ratio_bound * &res.opt;
                    if makespan > limit {
                        report
                            .errors
                            .push(format!("makespan {makespan} exceeds ratio_bound * OPT = {limit}"));
                    }
                    report.opt = Some(res.opt);
                }
                Err(e @ OracleError::GuardExceeded { .. }) => return CliOutput::fail(EXIT_GUARD, e.to_string()),
            }
        }
        report.makespan = Some(makespan);
    }
    report.valid = report.errors.is_empty();
    let stdout = pretty(&report);
    if report.valid {
        CliOutput::ok(stdout)
    } else {
        CliOutput {
            code: EXIT_VALIDATION,
            stdout,
            stderr: report.errors.join("\n") + "\n",
        }
    }
}

fn cmd_bench(corpus: &Path, parallel: usize) -> CliOutput {
    let files = match corpus_files(corpus) {
        Ok(f) => f,
        Err(e) => return CliOutput::fail(EXIT_VALIDATION, format!("{}: {e}", corpus.display())),
    };
    let rows = match bench_corpus(&files, parallel.max(1)) {
        Ok(r) => r,
        Err(e) => return CliOutput::fail(EXIT_INTERNAL, e),
    };
    let mut stdout = String::from(CSV_HEADER);
    stdout.push('\n');
    for row in &rows {
        stdout.push_str(&row.csv());
        stdout.push('\n');
    }
    let max = rows.iter().filter_map(|r| r.ratio.as_ref()).max();
    let stderr = match max {
        Some(m) => format!("{} instances, max ratio makespan/OPT* = {m}\n", rows.len()),
        None => format!("{} instances, no ratio available\n", rows.len()),
    };
    CliOutput {
        code: EXIT_OK,
        stdout,
        stderr,
    }
}
