use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::instance::{Instance, JobId, MachineId, Rational};

/// `R`: a valid schedule keeps every machine at most `1 + R` in scaled units.
pub fn slack_r() -> Rational {
    Rational::new(5, 6)
}

/// `1 + R = 11/6`.
pub fn capacity() -> Rational {
    Rational::new(11, 6)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockerType {
    SmallToAny,
    BigToAny,
    BigToLeast,
    BigToBig,
}

impl BlockerType {
    pub fn rank(self) -> u8 {
        match self {
            BlockerType::SmallToAny => 1,
            BlockerType::BigToAny => 2,
            BlockerType::BigToLeast => 3,
            BlockerType::BigToBig => 4,
        }
    }

    pub fn from_rank(rank: u8) -> Option<Self> {
        match rank {
            1 => Some(BlockerType::SmallToAny),
            2 => Some(BlockerType::BigToAny),
            3 => Some(BlockerType::BigToLeast),
            4 => Some(BlockerType::BigToBig),
            _ => None,
        }
    }

    /// Small-to-any and big-to-any blockers make every job undesirable on their machine.
    pub fn blocks_all(self) -> bool {
        matches!(self, BlockerType::SmallToAny | BlockerType::BigToAny)
    }
}

/// Move value `(rank, tiebreak)`, compared lexicographically.
///
/// For big-to-least moves the tiebreak is `-min B_i` where jobs are numbered
/// from 1 in canonical order, so job index `j` counts as `j + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MoveValue {
    pub rank: u8,
    pub tiebreak: i64,
}

impl MoveValue {
    pub fn new(rank: u8, tiebreak: i64) -> Self {
        MoveValue { rank, tiebreak }
    }
}

impl fmt::Display for MoveValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.rank, self.tiebreak)
    }
}

/// One-based job label used inside move values.
pub fn job_label(j: JobId) -> i64 {
    j as i64 + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activator {
    Root,
    /// 0-based position in the blocker tree.
    Blocker(usize),
}

impl Activator {
    /// Root sorts before every blocker.
    pub fn order_key(self) -> i64 {
        match self {
            Activator::Root => -1,
            Activator::Blocker(k) => k as i64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blocker {
    pub job: JobId,
    pub machine: MachineId,
    pub kind: BlockerType,
    pub inserted_value: MoveValue,
    pub activator: Activator,
}

/// Insertion-ordered blockers `Θ_1..Θ_ℓ` (stored 0-based).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BlockerTree {
    blockers: Vec<Blocker>,
}

impl BlockerTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_blockers(blockers: Vec<Blocker>) -> Self {
        BlockerTree { blockers }
    }

    pub fn len(&self) -> usize {
        self.blockers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blockers.is_empty()
    }

    pub fn blockers(&self) -> &[Blocker] {
        &self.blockers
    }

    pub fn get(&self, pos: usize) -> Option<&Blocker> {
        self.blockers.get(pos)
    }

    pub fn contains_move(&self, job: JobId, machine: MachineId) -> bool {
        self.blockers.iter().any(|b| b.job == job && b.machine == machine)
    }

    pub(crate) fn push(&mut self, blocker: Blocker) {
        self.blockers.push(blocker);
    }

    /// Deletes `Θ_k` and everything added after it.
    pub(crate) fn truncate(&mut self, k: usize) {
        self.blockers.truncate(k);
    }

    pub fn signature(&self) -> Vec<MoveValue> {
        self.blockers.iter().map(|b| b.inserted_value).collect()
    }
}

/// Lexicographic order of signature vectors, each implicitly terminated by a
/// sentinel larger than every move value.
pub fn compare_signatures(a: &[MoveValue], b: &[MoveValue]) -> Ordering {
    for k in 0.. {
        match (a.get(k), b.get(k)) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Greater,
            (Some(_), None) => return Ordering::Less,
            (Some(x), Some(y)) => match x.cmp(y) {
                Ordering::Equal => continue,
                other => return other,
            },
        }
    }
    unreachable!()
}

/// Assignment `σ` with cached per-machine loads and job counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialSchedule {
    assignment: Vec<Option<MachineId>>,
    loads: Vec<Rational>,
    counts: Vec<usize>,
}

impl PartialSchedule {
    pub fn empty(inst: &Instance) -> Self {
        PartialSchedule {
            assignment: vec![None; inst.job_count()],
            loads: vec![Rational::zero(); inst.machine_count()],
            counts: vec![0; inst.machine_count()],
        }
    }

    /// Builds a schedule from an explicit assignment; `None` if some job is
    /// placed on a machine outside its allowed set.
    pub fn from_assignment(inst: &Instance, assignment: Vec<Option<MachineId>>) -> Option<Self> {
        if assignment.len() != inst.job_count() {
            return None;
        }
        let mut s = PartialSchedule::empty(inst);
        for (j, m) in assignment.into_iter().enumerate() {
            if let Some(i) = m {
                if i >= inst.machine_count() || !inst.allows(j, i) {
                    return None;
                }
                s.assign(inst, j, i);
            }
        }
        Some(s)
    }

    pub fn machine_of(&self, j: JobId) -> Option<MachineId> {
        self.assignment[j]
    }

    pub fn assignment(&self) -> &[Option<MachineId>] {
        &self.assignment
    }

    pub fn load(&self, i: MachineId) -> &Rational {
        &self.loads[i]
    }

    pub fn loads(&self) -> &[Rational] {
        &self.loads
    }

    /// `|σ⁻¹(i)|`
    pub fn count_on(&self, i: MachineId) -> usize {
        self.counts[i]
    }

    pub fn jobs_on(&self, i: MachineId) -> impl Iterator<Item = JobId> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, m)| **m == Some(i))
            .map(|(j, _)| j)
    }

    pub fn assigned_count(&self) -> usize {
        self.assignment.iter().filter(|m| m.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.assignment.iter().all(Option::is_some)
    }

    pub fn makespan(&self) -> Rational {
        self.loads.iter().cloned().fold(Rational::zero(), Rational::max)
    }

    /// Every load at most `1 + R`.
    pub fn is_valid(&self) -> bool {
        let cap = capacity();
        self.loads.iter().all(|l| *l <= cap)
    }

    /// Sets `σ(j) = i`, moving `j` off its previous machine.
    pub(crate) fn assign(&mut self, inst: &Instance, j: JobId, i: MachineId) {
        if let Some(old) = self.assignment[j] {
            self.loads[old] -= inst.p(j);
            self.counts[old] -= 1;
        }
        self.assignment[j] = Some(i);
        self.loads[i] += inst.p(j);
        self.counts[i] += 1;
    }

    /// Recomputes loads and counts from the assignment and compares with the cache.
    pub fn cache_consistent(&self, inst: &Instance) -> bool {
        (0..self.loads.len()).all(|i| {
            let load: Rational = self.jobs_on(i).map(|j| inst.p(j)).sum();
            load == self.loads[i] && self.jobs_on(i).count() == self.counts[i]
        })
    }
}

/// The state of one `extend` call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchState {
    pub schedule: PartialSchedule,
    pub tree: BlockerTree,
    /// The job being inserted. `None` only for hand-built states.
    pub j_new: Option<JobId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PotentialMove {
    pub job: JobId,
    pub machine: MachineId,
    pub kind: BlockerType,
    pub value: MoveValue,
}

impl PotentialMove {
    /// `(rank, tiebreak, job, machine)`
    pub fn sort_key(&self) -> (MoveValue, JobId, MachineId) {
        (self.value, self.job, self.machine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(rank: u8, t: i64) -> MoveValue {
        MoveValue::new(rank, t)
    }

    #[test]
    fn move_values_order_lexicographically() {
        assert!(v(1, 5) < v(2, 0));
        assert!(v(3, -8) < v(3, -5));
        assert!(v(4, 1) < v(4, 2));
    }

    #[test]
    fn signature_sentinel() {
        assert_eq!(compare_signatures(&[v(2, 1)], &[]), Ordering::Less);
        assert_eq!(compare_signatures(&[v(2, 1), v(1, 0)], &[v(2, 1)]), Ordering::Less);
        assert_eq!(compare_signatures(&[v(2, 0)], &[v(2, 1), v(1, 0)]), Ordering::Less);
        assert_eq!(compare_signatures(&[v(2, 1)], &[v(2, 1)]), Ordering::Equal);
        assert_eq!(compare_signatures(&[v(3, 1)], &[v(2, 1), v(4, 4)]), Ordering::Greater);
    }

    #[test]
    fn schedule_bookkeeping() {
        let inst = Instance::new(
            2,
            vec![(Rational::new(1, 2), vec![0, 1]), (Rational::one(), vec![0, 1])],
        )
        .unwrap();
        let mut s = PartialSchedule::empty(&inst);
        s.assign(&inst, 0, 0);
        s.assign(&inst, 1, 0);
        assert_eq!(s.load(0), &Rational::new(3, 2));
        assert_eq!(s.count_on(0), 2);
        s.assign(&inst, 0, 1);
        assert_eq!(s.load(0), &Rational::one());
        assert_eq!(s.load(1), &Rational::new(1, 2));
        assert!(s.cache_consistent(&inst));
        assert!(s.is_complete());
        assert_eq!(s.makespan(), Rational::one());
        assert!(PartialSchedule::from_assignment(&inst, vec![Some(2), None]).is_none());
    }
}
