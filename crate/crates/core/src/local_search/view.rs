//! Quantities derived from a [`SearchState`]: big jobs per machine, the
//! machines marked by each blocker type, undesirability, the stuck small jobs
//! `S` and the active jobs `A`. Everything is recomputed from scratch.

use crate::instance::{classify, Instance, JobId, MachineId, Rational, SizeClass};

use super::types::{capacity, job_label, Activator, BlockerType, MoveValue, PotentialMove, SearchState};

pub struct StateView<'a> {
    inst: &'a Instance,
    state: &'a SearchState,
    big: Vec<bool>,
    /// `B_i`, ascending.
    big_on: Vec<Vec<JobId>>,
    /// Machine hosts a small-to-any or big-to-any blocker.
    blocks_all: Vec<bool>,
    has_type: [Vec<bool>; 4],
    stuck_small: Vec<bool>,
    active: Vec<bool>,
}

fn type_slot(kind: BlockerType) -> usize {
    kind.rank() as usize - 1
}

impl<'a> StateView<'a> {
    pub fn new(inst: &'a Instance, state: &'a SearchState) -> Self {
        let m = inst.machine_count();
        let n = inst.job_count();
        let big: Vec<bool> = (0..n).map(|j| classify(inst.p(j)) == SizeClass::Big).collect();

        let mut big_on = vec![Vec::new(); m];
        for (j, &is_big) in big.iter().enumerate() {
            if let (true, Some(i)) = (is_big, state.schedule.machine_of(j)) {
                big_on[i].push(j);
            }
        }

        let mut blocks_all = vec![false; m];
        let mut has_type: [Vec<bool>; 4] = std::array::from_fn(|_| vec![false; m]);
        for b in state.tree.blockers() {
            has_type[type_slot(b.kind)][b.machine] = true;
            if b.kind.blocks_all() {
                blocks_all[b.machine] = true;
            }
        }

        let mut view = StateView {
            inst,
            state,
            big,
            big_on,
            blocks_all,
            has_type,
            stuck_small: vec![false; n],
            active: vec![false; n],
        };

        for j in 0..n {
            let Some(home) = state.schedule.machine_of(j) else {
                continue;
            };
            if !view.big[j] {
                view.stuck_small[j] = inst.job(j).allowed.iter().all(|&i| i == home || view.blocks_all[i]);
            }
        }
        for j in 0..n {
            view.active[j] = Some(j) == state.j_new
                || view.stuck_small[j]
                || state
                    .schedule
                    .machine_of(j)
                    .is_some_and(|home| view.undesirable(j, home));
        }
        view
    }

    pub fn instance(&self) -> &Instance {
        self.inst
    }

    pub fn state(&self) -> &SearchState {
        self.state
    }

    pub fn is_big(&self, j: JobId) -> bool {
        self.big[j]
    }

    pub fn big_on(&self, i: MachineId) -> &[JobId] {
        &self.big_on[i]
    }

    /// `min B_i`
    pub fn min_big(&self, i: MachineId) -> Option<JobId> {
        self.big_on[i].first().copied()
    }

    pub fn hosts(&self, i: MachineId, kind: BlockerType) -> bool {
        self.has_type[type_slot(kind)][i]
    }

    /// `i ∈ M(B_S ∪ B_BS)`
    pub fn blocks_all(&self, i: MachineId) -> bool {
        self.blocks_all[i]
    }

    /// Machines hosting a blocker of `kind`, ascending.
    pub fn machines_with(&self, kind: BlockerType) -> Vec<MachineId> {
        (0..self.inst.machine_count())
            .filter(|&i| self.hosts(i, kind))
            .collect()
    }

    pub fn undesirable(&self, j: JobId, i: MachineId) -> bool {
        if self.blocks_all[i] {
            return true;
        }
        if !self.big[j] {
            return false;
        }
        if self.hosts(i, BlockerType::BigToBig) {
            return true;
        }
        self.hosts(i, BlockerType::BigToLeast) && self.min_big(i).is_some_and(|mb| j <= mb)
    }

    /// Whether blocker `kind` on machine `i` marks `j` undesirable.
    pub fn marks(&self, kind: BlockerType, i: MachineId, j: JobId) -> bool {
        match kind {
            BlockerType::SmallToAny | BlockerType::BigToAny => true,
            BlockerType::BigToBig => self.big[j],
            BlockerType::BigToLeast => self.big[j] && self.min_big(i).is_some_and(|mb| j <= mb),
        }
    }

    pub fn is_stuck_small(&self, j: JobId) -> bool {
        self.stuck_small[j]
    }

    pub fn is_active(&self, j: JobId) -> bool {
        self.active[j]
    }

    pub fn active_jobs(&self) -> Vec<JobId> {
        (0..self.inst.job_count()).filter(|&j| self.active[j]).collect()
    }

    /// `p(S_i)`
    pub fn stuck_small_load(&self, i: MachineId) -> Rational {
        self.state
            .schedule
            .jobs_on(i)
            .filter(|&j| self.stuck_small[j])
            .map(|j| self.inst.p(j))
            .sum()
    }

    /// `p(B_i)`
    pub fn big_load(&self, i: MachineId) -> Rational {
        self.big_on[i].iter().map(|&j| self.inst.p(j)).sum()
    }

    /// `p(B_i^min)`
    pub fn min_big_load(&self, i: MachineId) -> Rational {
        self.min_big(i).map_or_else(Rational::zero, |j| self.inst.p(j).clone())
    }

    /// Type of a big move given `p(S_i)`, `p(B_i)`, `p(B_i^min)` and `p_j`, or
    /// `None` when `p(S_i) + p_j > 1 + R`.
    pub fn big_move_type(stuck: &Rational, big: &Rational, min_big: &Rational, p: &Rational) -> Option<BlockerType> {
        let cap = capacity();
        let with_all = stuck + big + p;
        let with_min = stuck + min_big + p;
        let alone = stuck + p;
        if with_all <= cap {
            Some(BlockerType::BigToAny)
        } else if with_min > cap && alone <= cap {
            Some(BlockerType::BigToLeast)
        } else if with_min <= cap {
            // with_all > cap here
            Some(BlockerType::BigToBig)
        } else {
            None
        }
    }

    fn value_of(&self, kind: BlockerType, i: MachineId) -> MoveValue {
        let count = self.state.schedule.count_on(i) as i64;
        let tiebreak = match kind {
            BlockerType::SmallToAny | BlockerType::BigToAny => count,
            BlockerType::BigToLeast => {
                -job_label(self.min_big(i).expect("big-to-least needs a big job on the machine"))
            }
            BlockerType::BigToBig => self.big_on[i].len() as i64,
        };
        MoveValue::new(kind.rank(), tiebreak)
    }

    /// The move `(j, i)` as a potential move, if it is one.
    pub fn potential_move(&self, j: JobId, i: MachineId) -> Option<PotentialMove> {
        if !self.active[j]
            || !self.inst.allows(j, i)
            || self.state.schedule.machine_of(j) == Some(i)
            || self.state.tree.contains_move(j, i)
            || self.undesirable(j, i)
        {
            return None;
        }
        let kind = if self.big[j] {
            Self::big_move_type(
                &self.stuck_small_load(i),
                &self.big_load(i),
                &self.min_big_load(i),
                self.inst.p(j),
            )?
        } else {
            BlockerType::SmallToAny
        };
        Some(PotentialMove {
            job: j,
            machine: i,
            kind,
            value: self.value_of(kind, i),
        })
    }

    /// All potential moves sorted by `(value, job, machine)`.
    pub fn potential_moves(&self) -> Vec<PotentialMove> {
        let mut out = Vec::new();
        for j in 0..self.inst.job_count() {
            if !self.active[j] {
                continue;
            }
            for &i in &self.inst.job(j).allowed {
                if let Some(mv) = self.potential_move(j, i) {
                    out.push(mv);
                }
            }
        }
        out.sort_by_key(PotentialMove::sort_key);
        out
    }

    /// The blocker that activates `j`: root for `j_new`, otherwise the
    /// earliest blocker on `σ(j)` that marks `j` undesirable.
    pub fn activator_of(&self, j: JobId) -> Option<Activator> {
        if Some(j) == self.state.j_new {
            return Some(Activator::Root);
        }
        let home = self.state.schedule.machine_of(j)?;
        self.state
            .tree
            .blockers()
            .iter()
            .position(|b| b.machine == home && self.marks(b.kind, home, j))
            .map(Activator::Blocker)
    }
}
