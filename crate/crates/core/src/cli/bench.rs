use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config_lp::ConfigLp;
use crate::instance::{Instance, Rational};
use crate::local_search::{run, InsertionOrder, RunOutcome, SearchOptions};
use crate::oracle::brute_force_opt;

use super::estimate::estimate;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub instance_path: String,
    pub machines: usize,
    pub jobs: usize,
    /// `None` when the enumeration guard is exceeded.
    pub opt_star: Option<Rational>,
    pub opt_integral: Option<Rational>,
    pub ls_makespan: Rational,
    /// `ls_makespan / opt_star`
    pub ratio: Option<Rational>,
    pub iterations: u64,
    pub blockers_added: u64,
}

pub const CSV_HEADER: &str =
    "instance_path,machines,jobs,opt_star,opt_integral,ls_makespan,ratio,iterations,blockers_added";

impl BenchRow {
    pub fn csv(&self) -> String {
        let opt = |v: &Option<Rational>| v.as_ref().map(|r| r.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.instance_path,
            self.machines,
            self.jobs,
            opt(&self.opt_star),
            opt(&self.opt_integral),
            self.ls_makespan,
            opt(&self.ratio),
            self.iterations,
            self.blockers_added
        )
    }
}

/// Runs the local search at `OPT*`, or at the estimate's `T_hi` when the LP
/// is out of reach.
pub fn bench_instance(path: &Path, inst: &Instance) -> Result<BenchRow, String> {
    let opts = SearchOptions::default();
    let opt_star = ConfigLp::default().opt_star(inst).ok();
    let opt_integral = brute_force_opt(inst).ok().map(|r| r.opt);
    let (schedule, stats) = match &opt_star {
        Some(t) => match run(inst, t, InsertionOrder::Descending, &opts, &mut ()).map_err(|e| e.to_string())? {
            RunOutcome::Complete(s) => {
                let stats = s.stats;
                (s, stats)
            }
            RunOutcome::Stuck { .. } => return Err(format!("stuck at OPT* = {t}")),
        },
        None => {
            let est = estimate(inst, InsertionOrder::Descending, &opts).map_err(|e| e.to_string())?;
            let stats = est.schedule.stats;
            (est.schedule, stats)
        }
    };
    let ratio = opt_star.as_ref().map(|t| &schedule.makespan / t);
    Ok(BenchRow {
        instance_path: path.display().to_string(),
        machines: inst.machine_count(),
        jobs: inst.job_count(),
        opt_star,
        opt_integral,
        ls_makespan: schedule.makespan,
        ratio,
        iterations: stats.iterations,
        blockers_added: stats.blockers_added,
    })
}

/// `*.json` files directly under `dir`, sorted.
pub fn corpus_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Rows come back sorted by path whatever the thread count.
pub fn bench_corpus(files: &[PathBuf], threads: usize) -> Result<Vec<BenchRow>, String> {
    let one = |path: &PathBuf| -> Result<BenchRow, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let inst = Instance::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        bench_instance(path, &inst).map_err(|e| format!("{}: {e}", path.display()))
    };
    let mut rows = if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        pool.install(|| files.par_iter().map(one).collect::<Result<Vec<_>, _>>())?
    } else {
        files.iter().map(one).collect::<Result<Vec<_>, _>>()?
    };
    rows.sort_by(|a, b| a.instance_path.cmp(&b.instance_path));
    Ok(rows)
}
