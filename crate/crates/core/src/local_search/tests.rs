use super::*;
use crate::instance::{generate_random, SizeProfile};

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

fn i2() -> Instance {
    Instance::from_json(
        r#"{"machines":2,"jobs":[{"p":"1","allowed":[0,1]},{"p":"1/2","allowed":[0]},{"p":"1/2","allowed":[1]}]}"#,
    )
    .unwrap()
}

fn state_with(inst: &Instance, assignment: Vec<Option<MachineId>>, j_new: Option<JobId>) -> SearchState {
    SearchState {
        schedule: PartialSchedule::from_assignment(inst, assignment).unwrap(),
        tree: BlockerTree::new(),
        j_new,
    }
}

fn pm(job: JobId, machine: MachineId, kind: BlockerType, rank: u8, tiebreak: i64) -> PotentialMove {
    PotentialMove {
        job,
        machine,
        kind,
        value: MoveValue::new(rank, tiebreak),
    }
}

#[test]
fn valid_move_threshold() {
    // job 0: p = 1 on machine 0; jobs 1, 2 unassigned
    let inst = Instance::new(2, vec![(r("1"), vec![0]), (r("5/6"), vec![0, 1]), (r("1"), vec![0, 1])]).unwrap();
    // canonical: 0 = 5/6, 1 = 1 (machine 0 only), 2 = 1
    let state = state_with(&inst, vec![None, Some(0), None], None);
    assert!(is_valid_move(&inst, &state, 2, 1).unwrap());
    assert!(is_valid_move(&inst, &state, 0, 0).unwrap());
    assert!(!is_valid_move(&inst, &state, 2, 0).unwrap());
    assert!(matches!(
        is_valid_move(&inst, &state, 1, 0),
        Err(LocalSearchError::MalformedMove { .. })
    ));
    assert!(matches!(
        is_valid_move(&inst, &state, 1, 1),
        Err(LocalSearchError::MalformedMove { .. })
    ));
}

#[test]
fn scaled_i2_big_to_any_moves() {
    let inst = i2().scale(&r("3/2")).unwrap();
    let state = state_with(&inst, vec![Some(0), Some(1), None], Some(2));
    let moves = potential_moves(&inst, &state);
    assert_eq!(
        moves,
        vec![
            pm(2, 0, BlockerType::BigToAny, 2, 1),
            pm(2, 1, BlockerType::BigToAny, 2, 1)
        ]
    );
    let view = StateView::new(&inst, &state);
    assert!(view.is_stuck_small(0) && view.is_stuck_small(1));
}

#[test]
fn oversized_job_has_no_potential_move() {
    let inst = Instance::new(1, vec![(r("2"), vec![0])]).unwrap();
    let state = state_with(&inst, vec![None], Some(0));
    assert!(potential_moves(&inst, &state).is_empty());
    assert_eq!(
        StateView::big_move_type(&Rational::zero(), &Rational::zero(), &Rational::zero(), &r("2")),
        None
    );
}

#[test]
fn small_job_blocked_everywhere_has_no_moves() {
    // job 0 (1/4) sits on machine 0 and may go to 1 or 2; j_new = job 1 (1/3)
    // already holds small-to-any blockers on machines 1 and 2
    let inst = Instance::new(3, vec![(r("1/4"), vec![0, 1, 2]), (r("1/3"), vec![1, 2])]).unwrap();
    let mut state = state_with(&inst, vec![Some(0), None], Some(1));
    for machine in [1, 2] {
        state.tree.push(Blocker {
            job: 1,
            machine,
            kind: BlockerType::SmallToAny,
            inserted_value: MoveValue::new(1, 0),
            activator: Activator::Root,
        });
    }
    let view = StateView::new(&inst, &state);
    assert!(view.is_stuck_small(0));
    assert!(view.is_active(0));
    assert!(potential_moves(&inst, &state).is_empty());
    assert!(crate::oracle::brute_force_potential_moves(&inst, &state).is_empty());
}

#[test]
fn add_blocker_prefers_lower_machine_on_tie() {
    let inst = i2().scale(&r("3/2")).unwrap();
    let mut state = state_with(&inst, vec![Some(0), Some(1), None], Some(2));
    let other = pm(2, 1, BlockerType::BigToAny, 2, 1);
    assert!(matches!(
        add_blocker(&inst, &mut state, &other),
        Err(LocalSearchError::NotMinimal { .. })
    ));
    let bogus = pm(0, 1, BlockerType::SmallToAny, 1, 1);
    assert!(matches!(
        add_blocker(&inst, &mut state, &bogus),
        Err(LocalSearchError::NotPotential { .. })
    ));
    let first = potential_moves(&inst, &state)[0].clone();
    assert_eq!((first.job, first.machine), (2, 0));
    assert_eq!(add_blocker(&inst, &mut state, &first).unwrap(), 0);
    let b = &state.tree.blockers()[0];
    assert_eq!(b.activator, Activator::Root);
    assert_eq!(b.job, 2);
    assert!(check_invariants(&inst, &state).is_clean());
}

#[test]
fn big_to_least_value_uses_one_based_min_label() {
    // machine 0 holds big jobs with canonical indices 4 (3/4) and 7 (1);
    // j_new = 8 (7/6) fits only next to S_0 = ∅
    let inst = Instance::new(
        3,
        vec![
            (r("1/6"), vec![1]),
            (r("1/6"), vec![1]),
            (r("1/6"), vec![1]),
            (r("1/6"), vec![1]),
            (r("3/4"), vec![0]),
            (r("4/5"), vec![2]),
            (r("9/10"), vec![2]),
            (r("1"), vec![0]),
            (r("7/6"), vec![0]),
        ],
    )
    .unwrap();
    let assignment = vec![
        Some(1),
        Some(1),
        Some(1),
        Some(1),
        Some(0),
        Some(2),
        Some(2),
        Some(0),
        None,
    ];
    let mut state = state_with(&inst, assignment, Some(8));
    let moves = potential_moves(&inst, &state);
    assert_eq!(moves, vec![pm(8, 0, BlockerType::BigToLeast, 3, -5)]);
    add_blocker(&inst, &mut state, &moves[0]).unwrap();
    assert_eq!(state.tree.blockers()[0].inserted_value, MoveValue::new(3, -5));
    let view = StateView::new(&inst, &state);
    // big jobs with index ≤ min B_0 = 4 are undesirable on machine 0
    assert!(view.undesirable(4, 0));
    assert!(!view.undesirable(7, 0));
    assert!(view.is_active(4));
    assert!(check_invariants(&inst, &state).is_clean());
}

/// The worked example: machines M1 = 0, M2 = 1, M3 = 2.
///
/// Canonical jobs: 0..=2 dedicated 1/6 on M1, 3 = 1/6 on {M2, M3}, 4 = 1/4 on
/// M3, 5 = 1/3 on {M1, M2}, 6 = 1/2 on {M2, M3}, 7 = 1/2 on M3, 8 = 1 on
/// {M1, M2}, 9 = 1 on M3, 10 = j_new = 1 on M1.
pub(crate) fn worked_example() -> (Instance, SearchState) {
    let jobs = vec![
        (r("1/6"), vec![0]),
        (r("1/6"), vec![0]),
        (r("1/6"), vec![0]),
        (r("1/6"), vec![1, 2]),
        (r("1/4"), vec![2]),
        (r("1/3"), vec![0, 1]),
        (r("1/2"), vec![1, 2]),
        (r("1/2"), vec![2]),
        (r("1"), vec![0, 1]),
        (r("1"), vec![2]),
        (r("1"), vec![0]),
    ];
    let inst = Instance::new(3, jobs).unwrap();
    let assignment = vec![
        Some(0),
        Some(0),
        Some(0),
        Some(1),
        Some(2),
        Some(1),
        Some(1),
        Some(2),
        Some(0),
        Some(2),
        None,
    ];
    let state = state_with(&inst, assignment, Some(10));
    (inst, state)
}

fn blocker(job: JobId, machine: MachineId, kind: BlockerType, v: (u8, i64), activator: Activator) -> Blocker {
    Blocker {
        job,
        machine,
        kind,
        inserted_value: MoveValue::new(v.0, v.1),
        activator,
    }
}

#[test]
fn worked_example_move_deletes_activator_suffix() {
    let (inst, mut state) = worked_example();
    for _ in 0..4 {
        assert_eq!(select_valid_tree_move(&inst, &state), None);
        let mv = potential_moves(&inst, &state)[0].clone();
        add_blocker(&inst, &mut state, &mv).unwrap();
        assert!(check_invariants(&inst, &state).is_clean());
    }
    let before = [
        blocker(10, 0, BlockerType::BigToLeast, (3, -9), Activator::Root),
        blocker(8, 1, BlockerType::BigToAny, (2, 3), Activator::Blocker(0)),
        blocker(3, 2, BlockerType::SmallToAny, (1, 3), Activator::Blocker(1)),
        blocker(5, 0, BlockerType::SmallToAny, (1, 4), Activator::Blocker(1)),
    ];
    assert_eq!(state.tree.blockers(), &before[..]);

    assert_eq!(valid_tree_moves(&inst, &state), vec![3]);
    let prefix = state.tree.blockers()[..1].to_vec();
    let out = perform_move(&inst, &mut state, 5, 0).unwrap();
    assert_eq!(out, MoveOutcome::Continued { kept: 1 });
    assert_eq!(state.tree.blockers(), &prefix[..]);
    assert_eq!(state.schedule.load(0), &r("11/6"));

    assert_eq!(select_valid_tree_move(&inst, &state), None);
    let readd = potential_moves(&inst, &state)[0].clone();
    assert_eq!(readd, pm(8, 1, BlockerType::BigToAny, 2, 2));
    assert!(readd.value < before[1].inserted_value);
}

#[test]
fn worked_example_extend_completes() {
    let (inst, state) = worked_example();
    let mut log = EventLog::default();
    let opts = SearchOptions {
        debug_invariants: true,
        ..Default::default()
    };
    let (outcome, stats) = extend(&inst, state.schedule, 10, &opts, &mut log).unwrap();
    let ExtendOutcome::Done(schedule) = outcome else {
        panic!("expected completion")
    };
    assert_eq!(schedule.machine_of(10), Some(0));
    assert!(schedule.is_valid());
    assert_eq!(stats.blockers_added, 6);
    assert!(matches!(
        log.events[4],
        TraceEvent::PerformMove {
            job: 5,
            kept: 1,
            completed: false,
            ..
        }
    ));
}

#[test]
fn perform_move_errors() {
    let (inst, mut state) = worked_example();
    assert!(matches!(
        perform_move(&inst, &mut state, 10, 0),
        Err(LocalSearchError::NotInTree { .. })
    ));
    let mv = potential_moves(&inst, &state)[0].clone();
    add_blocker(&inst, &mut state, &mv).unwrap();
    assert!(matches!(
        perform_move(&inst, &mut state, 10, 0),
        Err(LocalSearchError::InvalidMove { .. })
    ));
}

#[test]
fn extend_scaled_i2() {
    let inst = i2().scale(&r("3/2")).unwrap();
    let state = state_with(&inst, vec![Some(0), Some(1), None], Some(2));
    let mut log = EventLog::default();
    let (outcome, stats) = extend(&inst, state.schedule, 2, &SearchOptions::default(), &mut log).unwrap();
    let ExtendOutcome::Done(s) = outcome else {
        panic!("expected completion")
    };
    assert_eq!(s.assignment(), &[Some(0), Some(1), Some(0)]);
    assert_eq!(s.load(0), &Rational::one());
    assert_eq!(stats.iterations, 2);
    assert!(matches!(
        log.events[0],
        TraceEvent::AddBlocker {
            job: 2,
            machine: 0,
            kind: BlockerType::BigToAny,
            ..
        }
    ));
    assert!(matches!(log.events[1], TraceEvent::PerformMove { completed: true, .. }));
}

#[test]
fn extend_single_jobs() {
    let inst = Instance::new(1, vec![(r("1"), vec![0])]).unwrap();
    let (out, _) = extend(
        &inst,
        PartialSchedule::empty(&inst),
        0,
        &SearchOptions::default(),
        &mut (),
    )
    .unwrap();
    assert!(matches!(out, ExtendOutcome::Done(_)));

    let inst = Instance::new(1, vec![(r("2"), vec![0])]).unwrap();
    let (out, stats) = extend(
        &inst,
        PartialSchedule::empty(&inst),
        0,
        &SearchOptions::default(),
        &mut (),
    )
    .unwrap();
    let ExtendOutcome::Stuck(stuck) = out else {
        panic!("expected stuck")
    };
    assert_eq!(stats.iterations, 1);
    stuck.verify().unwrap();
}

#[test]
fn extend_preconditions() {
    let inst = Instance::new(1, vec![(r("1"), vec![0])]).unwrap();
    let mut s = PartialSchedule::empty(&inst);
    s.assign(&inst, 0, 0);
    assert!(matches!(
        extend(&inst, s, 0, &SearchOptions::default(), &mut ()),
        Err(LocalSearchError::Precondition(_))
    ));
}

#[test]
fn iteration_cap_is_reported() {
    let (inst, state) = worked_example();
    let opts = SearchOptions {
        iteration_cap: 3,
        debug_invariants: false,
    };
    assert!(matches!(
        extend(&inst, state.schedule, 10, &opts, &mut ()),
        Err(LocalSearchError::IterationCap { cap: 3, j_new: 10 })
    ));
}

#[test]
fn run_examples() {
    let inst = i2();
    let RunOutcome::Complete(s) = run(
        &inst,
        &r("3/2"),
        InsertionOrder::Descending,
        &SearchOptions::default(),
        &mut (),
    )
    .unwrap() else {
        panic!("expected completion")
    };
    assert_eq!(s.makespan, r("3/2"));
    let file = s.to_file(&inst);
    assert_eq!(file.assignment.len(), 3);
    assert_eq!(file.ratio_bound, r("11/6"));

    // every insertion order reaches makespan 3/2 ≤ 11/6 at T = 1
    for order in [
        InsertionOrder::Descending,
        InsertionOrder::Input,
        InsertionOrder::Shuffle(3),
    ] {
        let out = run(&inst, &Rational::one(), order, &SearchOptions::default(), &mut ()).unwrap();
        let s = out.schedule().expect("completes at T = 1");
        assert_eq!(s.makespan, r("3/2"));
    }

    let single = Instance::new(1, vec![(r("1"), vec![0])]).unwrap();
    let out = run(
        &single,
        &Rational::one(),
        InsertionOrder::Descending,
        &SearchOptions::default(),
        &mut (),
    )
    .unwrap();
    assert_eq!(out.schedule().unwrap().makespan, Rational::one());
}

#[test]
fn insertion_orders() {
    let inst = i2();
    assert_eq!(InsertionOrder::Descending.jobs(&inst), vec![2, 1, 0]);
    assert_eq!(InsertionOrder::Input.jobs(&inst), vec![2, 0, 1]);
    let mut shuffled = InsertionOrder::Shuffle(9).jobs(&inst);
    shuffled.sort_unstable();
    assert_eq!(shuffled, vec![0, 1, 2]);
    assert_eq!(
        "shuffle:9".parse::<InsertionOrder>().unwrap(),
        InsertionOrder::Shuffle(9)
    );
    assert_eq!("desc".parse::<InsertionOrder>().unwrap(), InsertionOrder::Descending);
    assert!("random".parse::<InsertionOrder>().is_err());
}

/// Builds a state with a big-to-big blocker on machine 0 holding big jobs 0, 1.
fn big_to_big_state() -> (Instance, SearchState) {
    let inst = Instance::new(2, vec![(r("2/3"), vec![0]), (r("2/3"), vec![0, 1]), (r("1"), vec![0])]).unwrap();
    let mut state = state_with(&inst, vec![Some(0), Some(0), None], Some(2));
    let mv = potential_moves(&inst, &state)[0].clone();
    assert_eq!(mv, pm(2, 0, BlockerType::BigToBig, 4, 2));
    add_blocker(&inst, &mut state, &mv).unwrap();
    (inst, state)
}

#[test]
fn invariants_clean_after_insertion() {
    let (inst, state) = big_to_big_state();
    assert!(check_invariants(&inst, &state).is_clean());
}

#[test]
fn invariants_flag_mutated_big_to_big_machine() {
    let (inst, mut state) = big_to_big_state();
    // take one big job off the machine: now p(S ∪ B) + p_j ≤ 11/6
    state.schedule.assign(&inst, 1, 1);
    let report = check_invariants(&inst, &state);
    assert!(report
        .violations
        .iter()
        .any(|v| v.position == Some(0) && v.message.starts_with("big-to-big")));

    // inject the blocker's own job onto the machine: the move is no longer well formed
    let (inst, mut state) = big_to_big_state();
    state.schedule.assign(&inst, 2, 0);
    let report = check_invariants(&inst, &state);
    assert!(!report.is_clean());
    assert!(report.violations.iter().any(|v| v.message.contains("exceeds")));
}

struct Differential {
    states: usize,
}

impl SearchObserver for Differential {
    fn on_iteration(&mut self, inst: &Instance, state: &SearchState) {
        let mine: Vec<_> = potential_moves(inst, state)
            .into_iter()
            .map(|m| (m.value.rank, m.value.tiebreak, m.job, m.machine))
            .collect();
        let theirs: Vec<_> = crate::oracle::brute_force_potential_moves(inst, state)
            .into_iter()
            .map(|m| (m.rank, m.tiebreak, m.job, m.machine))
            .collect();
        assert_eq!(mine, theirs, "state {state:?}");
        self.states += 1;
    }
}

#[test]
fn differential_on_small_corpus() {
    let mut diff = Differential { states: 0 };
    let opts = SearchOptions {
        debug_invariants: true,
        ..Default::default()
    };
    for seed in 0..40 {
        let inst = generate_random(3, 8, &SizeProfile::default(), &r("2/3"), seed).unwrap();
        for t in inst.subset_sums().iter().take(8) {
            run(&inst, t, InsertionOrder::Shuffle(seed), &opts, &mut diff).unwrap();
        }
    }
    assert!(diff.states > 500, "{}", diff.states);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn run_completes_within_bound_or_certifies(
            machines in 1usize..4,
            jobs in 1usize..8,
            density in 1i64..4,
            seed in 0u64..100_000,
            pick in 0usize..64,
        ) {
            let inst = generate_random(machines, jobs, &SizeProfile::default(), &Rational::new(density, 3), seed).unwrap();
            let grid = inst.subset_sums();
            let t = &grid[pick % grid.len()];
            let opts = SearchOptions { debug_invariants: true, ..Default::default() };
            match run(&inst, t, InsertionOrder::Shuffle(seed), &opts, &mut ()).unwrap() {
                RunOutcome::Complete(s) => {
                    prop_assert!(s.makespan <= capacity() * t);
                    for (j, &i) in s.assignment.iter().enumerate() {
                        prop_assert!(inst.allows(j, i));
                    }
                }
                RunOutcome::Stuck { stuck, .. } => {
                    let cert = crate::dual_witness::certify(&stuck).unwrap();
                    prop_assert!(cert.claim1 && cert.claim2);
                    prop_assert!(!crate::config_lp::lp_feasible(&inst, t).unwrap().feasible);
                }
            }
        }
    }
}
