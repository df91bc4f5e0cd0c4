//! Loop-top invariant checks.
//!
//! For a blocker at 0-based position `k` (so `Θ_{k+1}`), the load conditions
//! are evaluated against `S_i^{≤k}`, the stuck small jobs computed from the
//! machines of the small-to-any and big-to-any blockers among the first `k`
//! blockers only, and against the current `B_i`.

use std::collections::HashSet;

use crate::instance::{Instance, JobId, MachineId, Rational};

use super::types::{capacity, Activator, BlockerType, SearchState};
use super::view::StateView;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// 0-based blocker position, when the violation concerns a blocker.
    pub position: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InvariantReport {
    pub violations: Vec<Violation>,
}

impl InvariantReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, position: Option<usize>, message: String) {
        self.violations.push(Violation { position, message });
    }
}

/// `p(S_i^{≤k})`
fn prefix_stuck_small_load(
    inst: &Instance,
    state: &SearchState,
    view: &StateView,
    k: usize,
    machine: MachineId,
) -> Rational {
    let blocked: HashSet<MachineId> = state.tree.blockers()[..k]
        .iter()
        .filter(|b| b.kind.blocks_all())
        .map(|b| b.machine)
        .collect();
    state
        .schedule
        .jobs_on(machine)
        .filter(|&j| !view.is_big(j))
        .filter(|&j| {
            inst.job(j)
                .allowed
                .iter()
                .all(|&i| i == machine || blocked.contains(&i))
        })
        .map(|j| inst.p(j))
        .sum()
}

pub fn check_invariants(inst: &Instance, state: &SearchState) -> InvariantReport {
    let mut report = InvariantReport::default();
    let cap = capacity();
    let view = StateView::new(inst, state);

    for (i, load) in state.schedule.loads().iter().enumerate() {
        if *load > cap {
            report.push(None, format!("machine {i} load {load} exceeds 11/6"));
        }
    }
    if !state.schedule.cache_consistent(inst) {
        report.push(None, "cached loads differ from recomputed loads".into());
    }
    if let Some(j) = state.j_new {
        if state.schedule.machine_of(j).is_some() {
            report.push(None, format!("j_new {j} is already assigned"));
        }
    }

    let mut seen_moves: HashSet<(JobId, MachineId)> = HashSet::new();
    let mut all_blocking: HashSet<MachineId> = HashSet::new();
    for (k, b) in state.tree.blockers().iter().enumerate() {
        if !seen_moves.insert((b.job, b.machine)) {
            report.push(Some(k), format!("move ({}, {}) appears twice", b.job, b.machine));
        }
        if !inst.allows(b.job, b.machine) {
            report.push(Some(k), format!("job {} not allowed on {}", b.job, b.machine));
        }
        if state.schedule.machine_of(b.job) == Some(b.machine) {
            report.push(Some(k), format!("job {} already sits on {}", b.job, b.machine));
        }
        if b.kind.blocks_all() && !all_blocking.insert(b.machine) {
            report.push(Some(k), format!("machine {} hosts two any-type blockers", b.machine));
        }
        if view.is_big(b.job) != (b.kind != BlockerType::SmallToAny) {
            report.push(
                Some(k),
                format!("blocker type {:?} does not match size of job {}", b.kind, b.job),
            );
        }
        match b.activator {
            Activator::Root => {
                if Some(b.job) != state.j_new {
                    report.push(Some(k), "root-activated blocker is not for j_new".into());
                }
            }
            Activator::Blocker(a) => {
                if a >= k {
                    report.push(Some(k), format!("activator {a} does not precede blocker"));
                } else if view.activator_of(b.job) != Some(Activator::Blocker(a)) {
                    report.push(
                        Some(k),
                        format!(
                            "recorded activator {a} of job {} differs from current {:?}",
                            b.job,
                            view.activator_of(b.job)
                        ),
                    );
                }
            }
        }

        let p = inst.p(b.job);
        let i = b.machine;
        let stuck = prefix_stuck_small_load(inst, state, &view, k, i);
        let with_all = &stuck + view.big_load(i) + p;
        let with_min = &stuck + view.min_big_load(i) + p;
        let alone = &stuck + p;
        match b.kind {
            BlockerType::SmallToAny => {}
            BlockerType::BigToAny => {
                if with_all > cap {
                    report.push(Some(k), format!("big-to-any: p(S∪B)+p_j = {with_all} > 11/6"));
                }
            }
            BlockerType::BigToLeast => {
                if with_min <= cap {
                    report.push(Some(k), format!("big-to-least: p(S∪B_min)+p_j = {with_min} ≤ 11/6"));
                }
                if alone > cap {
                    report.push(Some(k), format!("big-to-least: p(S)+p_j = {alone} > 11/6"));
                }
            }
            BlockerType::BigToBig => {
                if with_all <= cap {
                    report.push(Some(k), format!("big-to-big: p(S∪B)+p_j = {with_all} ≤ 11/6"));
                }
                if with_min > cap {
                    report.push(Some(k), format!("big-to-big: p(S∪B_min)+p_j = {with_min} > 11/6"));
                }
            }
        }
    }
    report
}
