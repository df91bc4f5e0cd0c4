//! Brute-force ground truth for small instances.
//!
//! Nothing here reuses the local search's derived views or the LP code: the
//! potential-move evaluator re-derives every set directly from the raw
//! assignment and blocker list, so differential tests compare two independent
//! implementations.

use crate::instance::{Instance, JobId, MachineId, Rational};
use crate::local_search::SearchState;

pub const DEFAULT_ASSIGNMENT_GUARD: u64 = 100_000_000;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{machines}^{jobs} assignments exceed the guard of {limit}")]
    GuardExceeded { machines: usize, jobs: usize, limit: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub opt: Rational,
    /// Machine per canonical job.
    pub witness_schedule: Vec<MachineId>,
    /// Search nodes visited.
    pub explored: u64,
}

fn within_guard(machines: usize, jobs: usize, limit: u64) -> bool {
    let mut total: u64 = 1;
    for _ in 0..jobs {
        total = match total.checked_mul(machines as u64) {
            Some(t) if t <= limit => t,
            _ => return false,
        };
    }
    true
}

struct Bnb<'a> {
    inst: &'a Instance,
    order: Vec<JobId>,
    loads: Vec<Rational>,
    current: Vec<MachineId>,
    best: Option<(Rational, Vec<MachineId>)>,
    explored: u64,
}

impl Bnb<'_> {
    fn go(&mut self, depth: usize, makespan: Rational) {
        self.explored += 1;
        if let Some((best, _)) = &self.best {
            if makespan >= *best {
                return;
            }
        }
        if depth == self.order.len() {
            self.best = Some((makespan, self.current.clone()));
            return;
        }
        let j = self.order[depth];
        let mut machines = self.inst.job(j).allowed.clone();
        machines.sort_by(|&a, &b| self.loads[a].cmp(&self.loads[b]).then(a.cmp(&b)));
        for i in machines {
            let p = self.inst.p(j).clone();
            self.loads[i] += &p;
            self.current[j] = i;
            let next = makespan.clone().max(self.loads[i].clone());
            self.go(depth + 1, next);
            self.loads[i] -= &p;
        }
    }
}

/// Exact integral optimum by branch and bound: jobs by decreasing size,
/// machines by increasing current load, prune at the incumbent.
pub fn brute_force_opt(inst: &Instance) -> Result<OracleResult, OracleError> {
    brute_force_opt_with_guard(inst, DEFAULT_ASSIGNMENT_GUARD)
}

pub fn brute_force_opt_with_guard(inst: &Instance, limit: u64) -> Result<OracleResult, OracleError> {
    let (m, n) = (inst.machine_count(), inst.job_count());
    if !within_guard(m, n, limit) {
        return Err(OracleError::GuardExceeded {
            machines: m,
            jobs: n,
            limit,
        });
    }
    let mut order: Vec<JobId> = (0..n).collect();
    order.sort_by(|&a, &b| inst.p(b).cmp(inst.p(a)).then(a.cmp(&b)));
    let mut bnb = Bnb {
        inst,
        order,
        loads: vec![Rational::zero(); m],
        current: vec![0; n],
        best: None,
        explored: 0,
    };
    bnb.go(0, Rational::zero());
    let (opt, witness_schedule) = bnb.best.expect("every job has an allowed machine");
    Ok(OracleResult {
        opt,
        witness_schedule,
        explored: bnb.explored,
    })
}

/// A potential move as `(job, machine, rank, tiebreak)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OracleMove {
    pub rank: u8,
    pub tiebreak: i64,
    pub job: JobId,
    pub machine: MachineId,
}

/// Re-evaluates requirements 1 to 4 of potential moves directly from the raw
/// state. Sorted by `(rank, tiebreak, job, machine)`.
pub fn brute_force_potential_moves(inst: &Instance, state: &SearchState) -> Vec<OracleMove> {
    let half = Rational::new(1, 2);
    let limit = Rational::new(11, 6);
    let n = inst.job_count();
    let m = inst.machine_count();
    let sigma = state.schedule.assignment();
    let blockers = state.tree.blockers();
    let is_big = |j: JobId| *inst.p(j) > half;

    // rank 1 = small-to-any, 2 = big-to-any, 3 = big-to-least, 4 = big-to-big
    let machine_has = |i: MachineId, rank: u8| blockers.iter().any(|b| b.machine == i && b.kind.rank() == rank);
    let all_blocked = |i: MachineId| machine_has(i, 1) || machine_has(i, 2);
    let bigs_on = |i: MachineId| -> Vec<JobId> { (0..n).filter(|&j| sigma[j] == Some(i) && is_big(j)).collect() };
    let min_big = |i: MachineId| bigs_on(i).into_iter().min();

    let undesirable = |j: JobId, i: MachineId| -> bool {
        if all_blocked(i) {
            return true;
        }
        if is_big(j) && machine_has(i, 4) {
            return true;
        }
        if is_big(j) && machine_has(i, 3) {
            if let Some(mb) = min_big(i) {
                return j <= mb;
            }
        }
        false
    };

    let in_s = |j: JobId| -> bool {
        match sigma[j] {
            None => false,
            Some(home) => {
                !is_big(j)
                    && inst
                        .job(j)
                        .allowed
                        .iter()
                        .filter(|&&i| i != home)
                        .all(|&i| all_blocked(i))
            }
        }
    };

    let active = |j: JobId| -> bool {
        if state.j_new == Some(j) || in_s(j) {
            return true;
        }
        match sigma[j] {
            Some(home) => undesirable(j, home),
            None => false,
        }
    };

    let mut out = Vec::new();
    for j in 0..n {
        if !active(j) {
            continue;
        }
        for i in 0..m {
            if !inst.allows(j, i) || sigma[j] == Some(i) {
                continue;
            }
            if blockers.iter().any(|b| b.job == j && b.machine == i) {
                continue;
            }
            if undesirable(j, i) {
                continue;
            }
            let count = (0..n).filter(|&k| sigma[k] == Some(i)).count() as i64;
            if !is_big(j) {
                out.push(OracleMove {
                    rank: 1,
                    tiebreak: count,
                    job: j,
                    machine: i,
                });
                continue;
            }
            let p_s: Rational = (0..n)
                .filter(|&k| sigma[k] == Some(i) && in_s(k))
                .map(|k| inst.p(k))
                .sum();
            let big = bigs_on(i);
            let p_b: Rational = big.iter().map(|&k| inst.p(k)).sum();
            let p_min = min_big(i).map_or_else(Rational::zero, |k| inst.p(k).clone());
            let p_j = inst.p(j);

            let bs = &p_s + &p_b + p_j <= limit;
            let m1 = &p_s + &p_min + p_j > limit;
            let m2 = &p_s + p_j <= limit;
            let mm1 = &p_s + &p_b + p_j > limit;
            let mm2 = &p_s + &p_min + p_j <= limit;
            if bs {
                out.push(OracleMove {
                    rank: 2,
                    tiebreak: count,
                    job: j,
                    machine: i,
                });
            } else if m1 && m2 {
                let label = min_big(i).expect("nonempty B_i") as i64 + 1;
                out.push(OracleMove {
                    rank: 3,
                    tiebreak: -label,
                    job: j,
                    machine: i,
                });
            } else if mm1 && mm2 {
                out.push(OracleMove {
                    rank: 4,
                    tiebreak: big.len() as i64,
                    job: j,
                    machine: i,
                });
            }
        }
    }
    out.sort();
    out
}
