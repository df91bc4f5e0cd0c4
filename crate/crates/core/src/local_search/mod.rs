//! Blocker-tree local search.
//!
//! Works on an instance scaled so that the configuration-LP target is 1. A
//! valid partial schedule keeps every machine at most `1 + R = 11/6`. To insert
//! a job `j_new`, the search keeps a tree of pending moves (blockers). Each
//! iteration either performs a valid move stored in the tree, deleting the
//! suffix of the tree starting at the blocker that activated the moved job, or
//! adds the minimum-value potential move as a new blocker. If neither is
//! possible the configuration-LP is infeasible at the target, and the frozen
//! [`StuckState`] is the input for the dual witness.

mod invariants;
mod trace;
mod types;
mod view;

use std::cmp::Ordering;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{Instance, InstanceError, JobId, MachineId, Rational};

pub use invariants::{check_invariants, InvariantReport, Violation};
pub use trace::{EventLog, JsonTrace, SearchObserver, TraceEvent};
pub use types::{
    capacity, compare_signatures, job_label, slack_r, Activator, Blocker, BlockerTree, BlockerType, MoveValue,
    PartialSchedule, PotentialMove, SearchState,
};
pub use view::StateView;

pub const DEFAULT_ITERATION_CAP: u64 = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum LocalSearchError {
    #[error("({job}, {machine}) is not a move: machine not allowed or job already there")]
    MalformedMove { job: JobId, machine: MachineId },
    #[error("move ({job}, {machine}) is not in the blocker tree")]
    NotInTree { job: JobId, machine: MachineId },
    #[error("move ({job}, {machine}) is not valid")]
    InvalidMove { job: JobId, machine: MachineId },
    #[error("move ({job}, {machine}) is not a potential move")]
    NotPotential { job: JobId, machine: MachineId },
    #[error("move ({job}, {machine}) is not the minimum potential move")]
    NotMinimal { job: JobId, machine: MachineId },
    #[error("job {job} has no activating blocker")]
    Disconnected { job: JobId },
    #[error("iteration cap {cap} exceeded while inserting job {j_new}")]
    IterationCap { cap: u64, j_new: JobId },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub iteration_cap: u64,
    /// Run [`check_invariants`] at the top of every iteration.
    pub debug_invariants: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            iteration_cap: DEFAULT_ITERATION_CAP,
            debug_invariants: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub iterations: u64,
    pub blockers_added: u64,
    pub moves_performed: u64,
}

impl std::ops::AddAssign for SearchStats {
    fn add_assign(&mut self, o: Self) {
        self.iterations += o.iterations;
        self.blockers_added += o.blockers_added;
        self.moves_performed += o.moves_performed;
    }
}

/// A state in which no tree move is valid and no potential move exists.
#[derive(Debug, Clone)]
pub struct StuckState {
    /// The scaled instance the search ran on.
    pub instance: Instance,
    pub state: SearchState,
    /// The unscaled target that was attempted.
    pub t: Rational,
}

impl StuckState {
    /// Re-checks both stuck conditions from scratch.
    pub fn verify(&self) -> Result<(), String> {
        let inst = &self.instance;
        if self.state.j_new.is_none() {
            return Err("stuck state without j_new".into());
        }
        if let Some(pos) = select_valid_tree_move(inst, &self.state) {
            let b = &self.state.tree.blockers()[pos];
            return Err(format!("tree move ({}, {}) is valid", b.job, b.machine));
        }
        if let Some(mv) = potential_moves(inst, &self.state).first() {
            return Err(format!("potential move ({}, {}) exists", mv.job, mv.machine));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum ExtendOutcome {
    Done(PartialSchedule),
    Stuck(Box<StuckState>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveOutcome {
    /// `j_new` was placed.
    Done,
    /// The tree was cut back to this many blockers.
    Continued { kept: usize },
}

fn check_move(inst: &Instance, state: &SearchState, j: JobId, i: MachineId) -> Result<(), LocalSearchError> {
    if j >= inst.job_count()
        || i >= inst.machine_count()
        || !inst.allows(j, i)
        || state.schedule.machine_of(j) == Some(i)
    {
        return Err(LocalSearchError::MalformedMove { job: j, machine: i });
    }
    Ok(())
}

/// `p(σ⁻¹(i)) + p_j ≤ 1 + R`
pub fn is_valid_move(inst: &Instance, state: &SearchState, j: JobId, i: MachineId) -> Result<bool, LocalSearchError> {
    check_move(inst, state, j, i)?;
    Ok(state.schedule.load(i) + inst.p(j) <= capacity())
}

pub fn potential_moves(inst: &Instance, state: &SearchState) -> Vec<PotentialMove> {
    StateView::new(inst, state).potential_moves()
}

/// Positions of tree blockers whose move is currently valid.
pub fn valid_tree_moves(inst: &Instance, state: &SearchState) -> Vec<usize> {
    let cap = capacity();
    state
        .tree
        .blockers()
        .iter()
        .enumerate()
        .filter(|(_, b)| {
            state.schedule.machine_of(b.job) != Some(b.machine) && state.schedule.load(b.machine) + inst.p(b.job) <= cap
        })
        .map(|(k, _)| k)
        .collect()
}

/// Among valid tree moves, the one whose activator comes first, then the
/// earliest blocker.
pub fn select_valid_tree_move(inst: &Instance, state: &SearchState) -> Option<usize> {
    valid_tree_moves(inst, state)
        .into_iter()
        .min_by_key(|&k| (state.tree.blockers()[k].activator.order_key(), k))
}

fn push_blocker(view: &StateView, mv: &PotentialMove) -> Result<Blocker, LocalSearchError> {
    let activator = view
        .activator_of(mv.job)
        .ok_or(LocalSearchError::Disconnected { job: mv.job })?;
    Ok(Blocker {
        job: mv.job,
        machine: mv.machine,
        kind: mv.kind,
        inserted_value: mv.value,
        activator,
    })
}

/// Appends `mv`, which must be the minimum potential move.
pub fn add_blocker(inst: &Instance, state: &mut SearchState, mv: &PotentialMove) -> Result<usize, LocalSearchError> {
    let blocker = {
        let view = StateView::new(inst, state);
        let moves = view.potential_moves();
        if !moves.contains(mv) {
            return Err(LocalSearchError::NotPotential {
                job: mv.job,
                machine: mv.machine,
            });
        }
        if moves[0] != *mv {
            return Err(LocalSearchError::NotMinimal {
                job: mv.job,
                machine: mv.machine,
            });
        }
        push_blocker(&view, mv)?
    };
    state.tree.push(blocker);
    Ok(state.tree.len() - 1)
}

/// Performs the tree move `(j, i)` and cuts the tree back to just before the
/// blocker that activated `j`.
pub fn perform_move(
    inst: &Instance,
    state: &mut SearchState,
    j: JobId,
    i: MachineId,
) -> Result<MoveOutcome, LocalSearchError> {
    check_move(inst, state, j, i)?;
    let pos = state
        .tree
        .blockers()
        .iter()
        .position(|b| b.job == j && b.machine == i)
        .ok_or(LocalSearchError::NotInTree { job: j, machine: i })?;
    if !is_valid_move(inst, state, j, i)? {
        return Err(LocalSearchError::InvalidMove { job: j, machine: i });
    }
    let activator = state.tree.blockers()[pos].activator;
    state.schedule.assign(inst, j, i);
    if Some(j) == state.j_new {
        return Ok(MoveOutcome::Done);
    }
    match activator {
        Activator::Root => Err(LocalSearchError::InvariantViolation(format!(
            "job {j} is root-activated but is not j_new"
        ))),
        Activator::Blocker(k) => {
            state.tree.truncate(k);
            Ok(MoveOutcome::Continued { kept: k })
        }
    }
}

fn dump(inst: &Instance, state: &SearchState) -> String {
    let mut s = format!(
        "j_new = {:?}\nassignment = {:?}\nloads = {:?}\ntree:\n",
        state.j_new,
        state.schedule.assignment(),
        state.schedule.loads()
    );
    for (k, b) in state.tree.blockers().iter().enumerate() {
        s.push_str(&format!(
            "  [{k}] job {} (p = {}) -> machine {} {:?} value {} activator {:?}\n",
            b.job,
            inst.p(b.job),
            b.machine,
            b.kind,
            b.inserted_value,
            b.activator
        ));
    }
    s
}

/// Inserts `j_new` into the valid partial schedule `schedule`.
pub fn extend(
    inst: &Instance,
    schedule: PartialSchedule,
    j_new: JobId,
    opts: &SearchOptions,
    observer: &mut dyn SearchObserver,
) -> Result<(ExtendOutcome, SearchStats), LocalSearchError> {
    if j_new >= inst.job_count() {
        return Err(LocalSearchError::Precondition(format!("no job {j_new}")));
    }
    if schedule.machine_of(j_new).is_some() {
        return Err(LocalSearchError::Precondition(format!(
            "job {j_new} is already assigned"
        )));
    }
    if !schedule.is_valid() {
        return Err(LocalSearchError::Precondition("input schedule is not valid".into()));
    }
    let before: Vec<bool> = schedule.assignment().iter().map(Option::is_some).collect();

    let mut state = SearchState {
        schedule,
        tree: BlockerTree::new(),
        j_new: Some(j_new),
    };
    let mut stats = SearchStats::default();
    // signature after the previous addition; the empty vector stands for (∞)
    let mut last_signature: Vec<MoveValue> = Vec::new();

    while stats.iterations < opts.iteration_cap {
        stats.iterations += 1;
        observer.on_iteration(inst, &state);
        if opts.debug_invariants {
            let report = check_invariants(inst, &state);
            if !report.is_clean() {
                return Err(LocalSearchError::InvariantViolation(format!(
                    "{:?}\n{}",
                    report.violations,
                    dump(inst, &state)
                )));
            }
        }

        if let Some(pos) = select_valid_tree_move(inst, &state) {
            let b = state.tree.blockers()[pos].clone();
            let from = state.schedule.machine_of(b.job);
            let outcome = perform_move(inst, &mut state, b.job, b.machine)?;
            stats.moves_performed += 1;
            if !state.schedule.is_valid() {
                return Err(LocalSearchError::InvariantViolation(format!(
                    "schedule invalid after move\n{}",
                    dump(inst, &state)
                )));
            }
            let (kept, completed) = match outcome {
                MoveOutcome::Done => (state.tree.len(), true),
                MoveOutcome::Continued { kept } => (kept, false),
            };
            observer.on_event(
                inst,
                &TraceEvent::PerformMove {
                    job: b.job,
                    from,
                    to: b.machine,
                    blocker: pos,
                    activator: b.activator,
                    kept,
                    completed,
                },
            );
            if completed {
                let schedule = state.schedule;
                let lost = before
                    .iter()
                    .enumerate()
                    .any(|(j, &was)| was && schedule.machine_of(j).is_none());
                if lost {
                    return Err(LocalSearchError::InvariantViolation(
                        "a previously assigned job lost its machine".into(),
                    ));
                }
                return Ok((ExtendOutcome::Done(schedule), stats));
            }
            continue;
        }

        let blocker = {
            let view = StateView::new(inst, &state);
            let moves = view.potential_moves();
            match moves.first() {
                None => None,
                Some(mv) => Some(push_blocker(&view, mv)?),
            }
        };
        let Some(blocker) = blocker else {
            observer.on_event(
                inst,
                &TraceEvent::Stuck {
                    j_new,
                    tree_len: state.tree.len(),
                },
            );
            let stuck = StuckState {
                instance: inst.clone(),
                state,
                t: Rational::one(),
            };
            return Ok((ExtendOutcome::Stuck(Box::new(stuck)), stats));
        };
        let event = TraceEvent::AddBlocker {
            job: blocker.job,
            machine: blocker.machine,
            kind: blocker.kind,
            value: blocker.inserted_value,
            activator: blocker.activator,
            position: state.tree.len(),
        };
        state.tree.push(blocker);
        stats.blockers_added += 1;
        observer.on_event(inst, &event);

        let signature = state.tree.signature();
        if compare_signatures(&signature, &last_signature) != Ordering::Less {
            return Err(LocalSearchError::InvariantViolation(format!(
                "signature did not decrease: {last_signature:?} -> {signature:?}\n{}",
                dump(inst, &state)
            )));
        }
        last_signature = signature;
    }
    Err(LocalSearchError::IterationCap {
        cap: opts.iteration_cap,
        j_new,
    })
}

/// Order in which jobs are inserted into the empty schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InsertionOrder {
    /// Largest first (descending canonical index).
    #[default]
    Descending,
    /// Input file order.
    Input,
    Shuffle(u64),
}

impl InsertionOrder {
    pub fn jobs(&self, inst: &Instance) -> Vec<JobId> {
        let n = inst.job_count();
        match *self {
            InsertionOrder::Descending => (0..n).rev().collect(),
            InsertionOrder::Input => {
                let mut v: Vec<JobId> = (0..n).collect();
                v.sort_by_key(|&j| inst.job(j).original);
                v
            }
            InsertionOrder::Shuffle(seed) => {
                let mut v: Vec<JobId> = (0..n).collect();
                v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                v
            }
        }
    }
}

impl FromStr for InsertionOrder {
    type Err = String;

    /// `desc`, `input` or `shuffle:SEED`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desc" => Ok(InsertionOrder::Descending),
            "input" => Ok(InsertionOrder::Input),
            _ => s
                .strip_prefix("shuffle:")
                .and_then(|seed| seed.parse().ok())
                .map(InsertionOrder::Shuffle)
                .ok_or_else(|| format!("unknown order `{s}` (expected desc, input or shuffle:SEED)")),
        }
    }
}

/// A complete schedule in original units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    /// Machine per canonical job.
    pub assignment: Vec<MachineId>,
    pub makespan: Rational,
    pub t: Rational,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ScheduleFile {
    /// Machine per input position.
    pub assignment: Vec<usize>,
    pub makespan: Rational,
    #[serde(rename = "T")]
    pub t: Rational,
    pub ratio_bound: Rational,
}

impl Schedule {
    pub fn to_file(&self, inst: &Instance) -> ScheduleFile {
        ScheduleFile {
            assignment: crate::config_lp::by_original(inst, &self.assignment),
            makespan: self.makespan.clone(),
            t: self.t.clone(),
            ratio_bound: capacity(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum RunOutcome {
    Complete(Schedule),
    Stuck { stuck: Box<StuckState>, stats: SearchStats },
}

impl RunOutcome {
    pub fn stats(&self) -> SearchStats {
        match self {
            RunOutcome::Complete(s) => s.stats,
            RunOutcome::Stuck { stats, .. } => *stats,
        }
    }

    pub fn schedule(&self) -> Option<&Schedule> {
        match self {
            RunOutcome::Complete(s) => Some(s),
            RunOutcome::Stuck { .. } => None,
        }
    }
}

/// Scales by `1/t` and inserts every job, starting from the empty schedule.
pub fn run(
    inst: &Instance,
    t: &Rational,
    order: InsertionOrder,
    opts: &SearchOptions,
    observer: &mut dyn SearchObserver,
) -> Result<RunOutcome, LocalSearchError> {
    let scaled = inst.scale(t)?;
    let mut schedule = PartialSchedule::empty(&scaled);
    let mut stats = SearchStats::default();
    for j in order.jobs(&scaled) {
        let (outcome, s) = extend(&scaled, schedule, j, opts, observer)?;
        stats += s;
        match outcome {
            ExtendOutcome::Done(next) => schedule = next,
            ExtendOutcome::Stuck(mut stuck) => {
                stuck.t = t.clone();
                return Ok(RunOutcome::Stuck { stuck, stats });
            }
        }
    }
    let makespan = schedule.makespan() * t;
    if makespan > capacity() * t {
        return Err(LocalSearchError::InvariantViolation(format!(
            "makespan {makespan} exceeds 11/6 * {t}"
        )));
    }
    let assignment = schedule
        .assignment()
        .iter()
        .map(|m| m.expect("complete schedule"))
        .collect();
    Ok(RunOutcome::Complete(Schedule {
        assignment,
        makespan,
        t: t.clone(),
        stats,
    }))
}

#[cfg(test)]
mod tests;
