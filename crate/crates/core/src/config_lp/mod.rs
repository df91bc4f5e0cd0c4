//! The configuration-LP, solved exactly.
//!
//! For a target makespan `T`, a configuration of machine `i` is a set of jobs
//! allowed on `i` with total size at most `T`. The primal asks for weights
//! `x_{i,C} ≥ 0` with `Σ_C x_{i,C} ≤ 1` per machine and total coverage `≥ 1`
//! per job. Its dual minimizes `Σ y_i − Σ z_j` subject to `y_i ≥ z(C)` for every
//! configuration. A dual point that is feasible and has negative objective
//! certifies that the primal is infeasible at `T`.
//!
//! Configurations are enumerated explicitly, so the solver is only meant for
//! small instances; [`ConfigLp::guard`] bounds the number of jobs allowed on a
//! single machine.

mod knapsack;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, JobId, MachineId, Rational};
pub use knapsack::{max_profit, KnapsackItem, KnapsackSolution};
pub use simplex::{solve_phase1, Phase1Outcome, Phase1Problem, SparseColumn};

pub const DEFAULT_GUARD: usize = 20;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConfigLpError {
    #[error("machine {machine} has {allowed} allowed jobs, enumeration guard is {limit}")]
    GuardExceeded {
        machine: MachineId,
        allowed: usize,
        limit: usize,
    },
    #[error("target makespan must be non-negative, got {0}")]
    NegativeTarget(Rational),
    #[error("dual solution has {got} {what} entries, expected {expected}")]
    MissingEntries {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("dual value {what}[{index}] = {value} is negative")]
    NegativeDual {
        what: &'static str,
        index: usize,
        value: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub machine: MachineId,
    /// Canonical job indices, ascending.
    pub jobs: Vec<JobId>,
}

impl Configuration {
    pub fn size(&self, inst: &Instance) -> Rational {
        self.jobs.iter().map(|&j| inst.p(j)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weight {
    pub config: Configuration,
    pub x: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrimalSolution {
    /// Nonzero weights only.
    pub weights: Vec<Weight>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpResult {
    pub t: Rational,
    pub feasible: bool,
    pub primal: Option<PrimalSolution>,
}

/// Per-machine `y` and per-job `z` (canonical job order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualSolution {
    pub y: Vec<Rational>,
    pub z: Vec<Rational>,
}

impl DualSolution {
    pub fn zero(inst: &Instance) -> Self {
        DualSolution {
            y: vec![Rational::zero(); inst.machine_count()],
            z: vec![Rational::zero(); inst.job_count()],
        }
    }

    pub fn objective(&self) -> Rational {
        let y: Rational = self.y.iter().sum();
        let z: Rational = self.z.iter().sum();
        y - z
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualViolation {
    pub machine: MachineId,
    /// A configuration with `z(C) > y_i`, the knapsack maximizer.
    pub config: Vec<JobId>,
    pub z_of_config: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualCheck {
    pub feasible: bool,
    pub objective: Rational,
    pub violations: Vec<DualViolation>,
}

impl DualCheck {
    /// Feasible with negative objective: the primal is infeasible.
    pub fn certifies_infeasibility(&self) -> bool {
        self.feasible && self.objective.is_negative()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConfigLp {
    pub guard: usize,
}

impl Default for ConfigLp {
    fn default() -> Self {
        ConfigLp { guard: DEFAULT_GUARD }
    }
}

impl ConfigLp {
    pub fn with_guard(guard: usize) -> Self {
        ConfigLp { guard }
    }

    pub fn check_guard(&self, inst: &Instance) -> Result<(), ConfigLpError> {
        for machine in 0..inst.machine_count() {
            let allowed = inst.jobs_allowed_on(machine).len();
            if allowed > self.guard {
                return Err(ConfigLpError::GuardExceeded {
                    machine,
                    allowed,
                    limit: self.guard,
                });
            }
        }
        Ok(())
    }

    /// All subsets of the jobs allowed on `machine` with size at most `t`,
    /// empty set first, in depth-first include-before-exclude order.
    pub fn enumerate_configs(
        &self,
        inst: &Instance,
        machine: MachineId,
        t: &Rational,
    ) -> Result<Vec<Configuration>, ConfigLpError> {
        if t.is_negative() {
            return Err(ConfigLpError::NegativeTarget(t.clone()));
        }
        let allowed = inst.jobs_allowed_on(machine);
        if allowed.len() > self.guard {
            return Err(ConfigLpError::GuardExceeded {
                machine,
                allowed: allowed.len(),
                limit: self.guard,
            });
        }
        let mut out = vec![Configuration {
            machine,
            jobs: Vec::new(),
        }];
        let mut current = Vec::new();
        extend_configs(inst, &allowed, 0, t.clone(), &mut current, machine, &mut out);
        Ok(out)
    }

    pub fn lp_feasible(&self, inst: &Instance, t: &Rational) -> Result<LpResult, ConfigLpError> {
        if t.is_negative() {
            return Err(ConfigLpError::NegativeTarget(t.clone()));
        }
        self.check_guard(inst)?;
        let m = inst.machine_count();
        let n = inst.job_count();

        let mut configs = Vec::new();
        for machine in 0..m {
            configs.extend(self.enumerate_configs(inst, machine, t)?);
        }

        // rows: machines 0..m, then jobs m..m+n
        let one = Rational::one();
        let mut columns: Vec<SparseColumn> = configs
            .iter()
            .map(|c| {
                let mut col = vec![(c.machine, one.clone())];
                col.extend(c.jobs.iter().map(|&j| (m + j, one.clone())));
                col
            })
            .collect();
        let slack_start = columns.len();
        columns.extend((0..m).map(|i| vec![(i, one.clone())]));
        columns.extend((0..n).map(|j| vec![(m + j, -Rational::one())]));

        let mut basis_hint = vec![None; m + n];
        for (i, hint) in basis_hint.iter_mut().enumerate().take(m) {
            *hint = Some(slack_start + i);
        }
        let problem = Phase1Problem {
            rows: m + n,
            columns,
            rhs: vec![one; m + n],
            basis_hint,
        };
        let outcome = solve_phase1(&problem);
        if !outcome.feasible {
            return Ok(LpResult {
                t: t.clone(),
                feasible: false,
                primal: None,
            });
        }
        let weights = configs
            .into_iter()
            .zip(outcome.x)
            .filter(|(_, x)| !x.is_zero())
            .map(|(config, x)| Weight { config, x })
            .collect();
        Ok(LpResult {
            t: t.clone(),
            feasible: true,
            primal: Some(PrimalSolution { weights }),
        })
    }

    /// Smallest `T` at which the LP is feasible, together with the solution there.
    ///
    /// The configuration sets only change at subset sums of the processing
    /// times, so the minimum is one of them; binary search over the sorted sums
    /// is exact because feasibility is monotone in `T`.
    pub fn opt_star_with_solution(&self, inst: &Instance) -> Result<LpResult, ConfigLpError> {
        self.check_guard(inst)?;
        let grid = inst.subset_sums();
        if grid.is_empty() {
            return self.lp_feasible(inst, &Rational::zero());
        }
        // the total size is always feasible: any assignment is an integral solution
        let mut hi = grid.len() - 1;
        let mut best = self.lp_feasible(inst, &grid[hi])?;
        debug_assert!(best.feasible);
        let mut lo: isize = -1;
        while hi as isize - lo > 1 {
            let mid = ((lo + hi as isize) / 2) as usize;
            let res = self.lp_feasible(inst, &grid[mid])?;
            if res.feasible {
                hi = mid;
                best = res;
            } else {
                lo = mid as isize;
            }
        }
        Ok(best)
    }

    pub fn opt_star(&self, inst: &Instance) -> Result<Rational, ConfigLpError> {
        Ok(self.opt_star_with_solution(inst)?.t)
    }
}

fn extend_configs(
    inst: &Instance,
    allowed: &[JobId],
    from: usize,
    room: Rational,
    current: &mut Vec<JobId>,
    machine: MachineId,
    out: &mut Vec<Configuration>,
) {
    for k in from..allowed.len() {
        let j = allowed[k];
        // allowed is in canonical (size) order, so nothing later fits either
        if *inst.p(j) > room {
            break;
        }
        current.push(j);
        out.push(Configuration {
            machine,
            jobs: current.clone(),
        });
        extend_configs(inst, allowed, k + 1, &room - inst.p(j), current, machine, out);
        current.pop();
    }
}

pub fn enumerate_configs(
    inst: &Instance,
    machine: MachineId,
    t: &Rational,
) -> Result<Vec<Configuration>, ConfigLpError> {
    ConfigLp::default().enumerate_configs(inst, machine, t)
}

pub fn lp_feasible(inst: &Instance, t: &Rational) -> Result<LpResult, ConfigLpError> {
    ConfigLp::default().lp_feasible(inst, t)
}

pub fn opt_star(inst: &Instance) -> Result<Rational, ConfigLpError> {
    ConfigLp::default().opt_star(inst)
}

/// Checks the primal constraints. Returns a description of the first violation.
pub fn verify_primal(inst: &Instance, t: &Rational, primal: &PrimalSolution) -> Result<(), String> {
    let mut machine_use = vec![Rational::zero(); inst.machine_count()];
    let mut coverage = vec![Rational::zero(); inst.job_count()];
    for w in &primal.weights {
        let c = &w.config;
        if w.x.is_negative() {
            return Err(format!("negative weight {} on machine {}", w.x, c.machine));
        }
        if c.machine >= inst.machine_count() {
            return Err(format!("machine {} out of range", c.machine));
        }
        if let Some(&j) = c
            .jobs
            .iter()
            .find(|&&j| j >= inst.job_count() || !inst.allows(j, c.machine))
        {
            return Err(format!("job {j} not allowed on machine {}", c.machine));
        }
        if c.size(inst) > *t {
            return Err(format!("configuration {:?} exceeds T = {t}", c.jobs));
        }
        machine_use[c.machine] += &w.x;
        for &j in &c.jobs {
            coverage[j] += &w.x;
        }
    }
    if let Some(i) = machine_use.iter().position(|u| *u > Rational::one()) {
        return Err(format!("machine {i} uses total weight {}", machine_use[i]));
    }
    if let Some(j) = coverage.iter().position(|c| *c < Rational::one()) {
        return Err(format!("job {j} covered only {}", coverage[j]));
    }
    Ok(())
}

/// Checks the dual constraints `y_i ≥ z(C)` for every configuration by
/// maximizing `z(C)` over `C_i(T)` with a knapsack search per machine.
pub fn verify_dual(inst: &Instance, t: &Rational, dual: &DualSolution) -> Result<DualCheck, ConfigLpError> {
    if dual.y.len() != inst.machine_count() {
        return Err(ConfigLpError::MissingEntries {
            what: "y",
            got: dual.y.len(),
            expected: inst.machine_count(),
        });
    }
    if dual.z.len() != inst.job_count() {
        return Err(ConfigLpError::MissingEntries {
            what: "z",
            got: dual.z.len(),
            expected: inst.job_count(),
        });
    }
    for (what, values) in [("y", &dual.y), ("z", &dual.z)] {
        if let Some(index) = values.iter().position(Rational::is_negative) {
            return Err(ConfigLpError::NegativeDual {
                what,
                index,
                value: values[index].clone(),
            });
        }
    }
    if t.is_negative() {
        return Err(ConfigLpError::NegativeTarget(t.clone()));
    }

    let mut violations = Vec::new();
    for machine in 0..inst.machine_count() {
        let items: Vec<KnapsackItem> = inst
            .jobs_allowed_on(machine)
            .into_iter()
            .map(|j| KnapsackItem {
                id: j,
                weight: inst.p(j).clone(),
                profit: dual.z[j].clone(),
            })
            .collect();
        let best = max_profit(&items, t);
        if best.value > dual.y[machine] {
            violations.push(DualViolation {
                machine,
                config: best.chosen,
                z_of_config: best.value,
            });
        }
    }
    Ok(DualCheck {
        feasible: violations.is_empty(),
        objective: dual.objective(),
        violations,
    })
}

#[derive(Serialize, Deserialize)]
struct WeightJson {
    machine: MachineId,
    config: Vec<usize>,
    x: Rational,
}

#[derive(Serialize, Deserialize)]
struct LpResultJson {
    #[serde(rename = "T")]
    t: Rational,
    feasible: bool,
    primal: Option<Vec<WeightJson>>,
}

#[derive(Serialize, Deserialize)]
struct DualJson {
    y: Vec<Rational>,
    z: Vec<Rational>,
}

impl LpResult {
    /// JSON with job indices mapped to input positions.
    pub fn to_json_value(&self, inst: &Instance) -> serde_json::Value {
        let primal = self.primal.as_ref().map(|p| {
            p.weights
                .iter()
                .map(|w| {
                    let mut config: Vec<usize> = w.config.jobs.iter().map(|&j| inst.job(j).original).collect();
                    config.sort_unstable();
                    WeightJson {
                        machine: w.config.machine,
                        config,
                        x: w.x.clone(),
                    }
                })
                .collect()
        });
        serde_json::to_value(LpResultJson {
            t: self.t.clone(),
            feasible: self.feasible,
            primal,
        })
        .expect("lp result serialization")
    }
}

impl DualSolution {
    /// JSON with `z` listed by input position.
    pub fn to_json_value(&self, inst: &Instance) -> serde_json::Value {
        serde_json::to_value(DualJson {
            y: self.y.clone(),
            z: by_original(inst, &self.z),
        })
        .expect("dual serialization")
    }

    pub fn from_json_value(inst: &Instance, value: serde_json::Value) -> Result<Self, serde_json::Error> {
        let raw: DualJson = serde_json::from_value(value)?;
        let map = inst.original_to_canonical();
        if raw.z.len() != map.len() {
            // left as-is; verify_dual reports the length mismatch
            return Ok(DualSolution { y: raw.y, z: raw.z });
        }
        let mut z = vec![Rational::zero(); map.len()];
        for (pos, v) in raw.z.into_iter().enumerate() {
            z[map[pos]] = v;
        }
        Ok(DualSolution { y: raw.y, z })
    }
}

/// Reorders a per-job vector from canonical to input order.
pub fn by_original<T: Clone>(inst: &Instance, values: &[T]) -> Vec<T> {
    let map = inst.original_to_canonical();
    map.iter().map(|&j| values[j].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    /// machines {0,1}; canonical jobs 0: 1/2 on {0}, 1: 1/2 on {1}, 2: 1 on {0,1}
    fn i2() -> Instance {
        Instance::from_json(
            r#"{"machines":2,"jobs":[{"p":"1","allowed":[0,1]},{"p":"1/2","allowed":[0]},{"p":"1/2","allowed":[1]}]}"#,
        )
        .unwrap()
    }

    fn single(p: &str) -> Instance {
        Instance::new(1, vec![(r(p), vec![0])]).unwrap()
    }

    #[test]
    fn enumerate_i2_machine0() {
        let configs = enumerate_configs(&i2(), 0, &Rational::one()).unwrap();
        let sets: Vec<_> = configs.iter().map(|c| c.jobs.clone()).collect();
        assert_eq!(sets, vec![vec![], vec![0], vec![2]]);
    }

    #[test]
    fn enumerate_at_zero_is_empty_config_only() {
        let configs = enumerate_configs(&i2(), 1, &Rational::zero()).unwrap();
        assert_eq!(configs.len(), 1);
        assert!(configs[0].jobs.is_empty());
    }

    #[test]
    fn enumerate_single_job() {
        let configs = enumerate_configs(&single("1"), 0, &Rational::one()).unwrap();
        let sets: Vec<_> = configs.iter().map(|c| c.jobs.clone()).collect();
        assert_eq!(sets, vec![vec![], vec![0]]);
    }

    #[test]
    fn enumerate_matches_subset_filter() {
        let inst =
            crate::instance::generate_random(3, 9, &crate::instance::SizeProfile::default(), &r("2/3"), 11).unwrap();
        let t = r("3/2");
        for machine in 0..3 {
            let allowed = inst.jobs_allowed_on(machine);
            let mut brute = Vec::new();
            for mask in 0u32..(1 << allowed.len()) {
                let set: Vec<_> = (0..allowed.len())
                    .filter(|k| mask >> k & 1 == 1)
                    .map(|k| allowed[k])
                    .collect();
                let size: Rational = set.iter().map(|&j| inst.p(j)).sum();
                if size <= t {
                    brute.push(set);
                }
            }
            brute.sort();
            let mut got: Vec<_> = enumerate_configs(&inst, machine, &t)
                .unwrap()
                .into_iter()
                .map(|c| c.jobs)
                .collect();
            got.sort();
            assert_eq!(got, brute);
        }
    }

    #[test]
    fn guard_is_enforced() {
        let jobs = (0..5).map(|_| (r("1"), vec![0])).collect();
        let inst = Instance::new(1, jobs).unwrap();
        let err = ConfigLp::with_guard(4).lp_feasible(&inst, &r("1")).unwrap_err();
        assert_eq!(
            err,
            ConfigLpError::GuardExceeded {
                machine: 0,
                allowed: 5,
                limit: 4
            }
        );
        assert!(ConfigLp::with_guard(4).opt_star(&inst).is_err());
    }

    #[test]
    fn i2_feasibility() {
        let inst = i2();
        assert!(!lp_feasible(&inst, &Rational::one()).unwrap().feasible);
        let res = lp_feasible(&inst, &r("3/2")).unwrap();
        assert!(res.feasible);
        verify_primal(&inst, &r("3/2"), res.primal.as_ref().unwrap()).unwrap();
    }

    #[test]
    fn single_job_feasible_with_unit_weight() {
        let inst = single("1");
        let res = lp_feasible(&inst, &Rational::one()).unwrap();
        assert!(res.feasible);
        let primal = res.primal.unwrap();
        assert_eq!(primal.weights.len(), 1);
        assert_eq!(primal.weights[0].config.jobs, vec![0]);
        assert_eq!(primal.weights[0].x, Rational::one());
    }

    #[test]
    fn opt_star_examples() {
        assert_eq!(opt_star(&single("5")).unwrap(), r("5"));
        assert_eq!(opt_star(&i2()).unwrap(), r("3/2"));
        let both = Instance::new(2, vec![(r("1"), vec![0, 1])]).unwrap();
        assert_eq!(opt_star(&both).unwrap(), r("1"));
    }

    #[test]
    fn verify_dual_examples() {
        let inst = i2();
        let zero = DualSolution::zero(&inst);
        let check = verify_dual(&inst, &Rational::one(), &zero).unwrap();
        assert!(check.feasible);
        assert!(check.objective.is_zero());
        assert!(!check.certifies_infeasibility());

        let mut d = DualSolution::zero(&inst);
        d.z[2] = Rational::one();
        let check = verify_dual(&inst, &Rational::one(), &d).unwrap();
        assert!(!check.feasible);
        assert_eq!(check.violations.len(), 2);
        assert_eq!(check.violations[0].config, vec![2]);
    }

    #[test]
    fn verify_dual_rejects_malformed() {
        let inst = i2();
        let mut d = DualSolution::zero(&inst);
        d.z.pop();
        assert!(matches!(
            verify_dual(&inst, &Rational::one(), &d),
            Err(ConfigLpError::MissingEntries { what: "z", .. })
        ));
        let mut d = DualSolution::zero(&inst);
        d.y[1] = r("-1/6");
        assert!(matches!(
            verify_dual(&inst, &Rational::one(), &d),
            Err(ConfigLpError::NegativeDual {
                what: "y",
                index: 1,
                ..
            })
        ));
    }

    #[test]
    fn hand_built_dual_refutes_i2_at_one() {
        // at T = 1 every configuration holds at most one job, so z ≡ 1/2 and
        // y ≡ 1/2 is feasible with objective 1 - 3/2
        let inst = i2();
        let d = DualSolution {
            y: vec![r("1/2"), r("1/2")],
            z: vec![r("1/2"), r("1/2"), r("1/2")],
        };
        let check = verify_dual(&inst, &Rational::one(), &d).unwrap();
        assert!(check.feasible);
        assert_eq!(check.objective, r("-1/2"));
        assert!(check.certifies_infeasibility());
        assert!(!lp_feasible(&inst, &Rational::one()).unwrap().feasible);
    }

    #[test]
    fn json_uses_input_positions() {
        let inst = i2();
        let res = lp_feasible(&inst, &r("3/2")).unwrap();
        let v = res.to_json_value(&inst);
        assert_eq!(v["T"], "3/2");
        assert_eq!(v["feasible"], true);
        for w in v["primal"].as_array().unwrap() {
            assert!(w["config"].as_array().unwrap().iter().all(|j| j.as_u64().unwrap() < 3));
        }
        let d = DualSolution {
            y: vec![r("1"), r("0")],
            z: vec![r("1/6"), r("2/6"), r("1")],
        };
        let v = d.to_json_value(&inst);
        assert_eq!(v["z"], serde_json::json!(["1", "1/6", "1/3"]));
        assert_eq!(DualSolution::from_json_value(&inst, v).unwrap(), d);
    }

    #[test]
    fn feasibility_is_monotone_on_samples() {
        for seed in 0..15 {
            let inst =
                crate::instance::generate_random(3, 6, &crate::instance::SizeProfile::default(), &r("1/2"), seed)
                    .unwrap();
            let grid = inst.subset_sums();
            let flags: Vec<bool> = grid.iter().map(|t| lp_feasible(&inst, t).unwrap().feasible).collect();
            for w in flags.windows(2) {
                assert!(!w[0] || w[1], "seed {seed}: {flags:?}");
            }
            for (t, &f) in grid.iter().zip(&flags) {
                if f {
                    let res = lp_feasible(&inst, t).unwrap();
                    verify_primal(&inst, t, res.primal.as_ref().unwrap()).unwrap();
                }
            }
        }
    }
}
