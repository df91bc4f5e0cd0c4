//! Restricted Assignment instances.
//!
//! An [`Instance`] is a set of machines and jobs, where job `j` has a single
//! processing time `p_j` and may only run on the machines in its allowed set
//! `Γ(j)`. Jobs are stored in canonical order: non-decreasing size, ties broken
//! by input position. The local search and its analysis rely on this order as
//! the total order on jobs, so every index in the library is a canonical index.
//! The input position is retained for reporting.

mod rational;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use rational::{ParseRationalError, Rational};

/// Machine index, 0-based.
pub type MachineId = usize;
/// Canonical job index, 0-based (the job with index `j` is the `(j+1)`-th smallest).
pub type JobId = usize;

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("malformed instance: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("instance needs at least one machine")]
    NoMachines,
    #[error("job {job}: bad processing time: {source}")]
    BadRational { job: usize, source: ParseRationalError },
    #[error("job {job}: processing time must be positive, got {p}")]
    NonPositive { job: usize, p: Rational },
    #[error("job {job}: allowed machine set is empty")]
    EmptyAllowed { job: usize },
    #[error("job {job}: machine index {machine} out of range (machines = {machines})")]
    MachineOutOfRange { job: usize, machine: i64, machines: usize },
    #[error("scaling factor must be positive, got {0}")]
    NonPositiveScale(Rational),
    #[error("invalid generator parameters: {0}")]
    Generator(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeClass {
    Small,
    Big,
}

/// Small iff `p ≤ 1/2`. Only meaningful on a scaled instance.
pub fn classify(p: &Rational) -> SizeClass {
    if *p <= Rational::new(1, 2) {
        SizeClass::Small
    } else {
        SizeClass::Big
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub p: Rational,
    /// Sorted, duplicate-free.
    pub allowed: Vec<MachineId>,
    /// Position of the job in the input file.
    pub original: usize,
}

impl Job {
    pub fn allows(&self, machine: MachineId) -> bool {
        self.allowed.binary_search(&machine).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    machines: usize,
    jobs: Vec<Job>,
}

#[derive(Serialize, Deserialize)]
struct RawJob {
    p: String,
    allowed: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    machines: usize,
    jobs: Vec<RawJob>,
}

impl Instance {
    /// Validates and canonicalizes `(p, allowed)` pairs given in input order.
    pub fn new(machines: usize, jobs: Vec<(Rational, Vec<MachineId>)>) -> Result<Self, InstanceError> {
        if machines == 0 {
            return Err(InstanceError::NoMachines);
        }
        let mut out = Vec::with_capacity(jobs.len());
        for (pos, (p, mut allowed)) in jobs.into_iter().enumerate() {
            if !p.is_positive() {
                return Err(InstanceError::NonPositive { job: pos, p });
            }
            if allowed.is_empty() {
                return Err(InstanceError::EmptyAllowed { job: pos });
            }
            if let Some(&bad) = allowed.iter().find(|&&i| i >= machines) {
                return Err(InstanceError::MachineOutOfRange {
                    job: pos,
                    machine: bad as i64,
                    machines,
                });
            }
            allowed.sort_unstable();
            allowed.dedup();
            out.push(Job {
                p,
                allowed,
                original: pos,
            });
        }
        // stable: ties keep input order
        out.sort_by(|a, b| a.p.cmp(&b.p));
        Ok(Instance { machines, jobs: out })
    }

    pub fn machine_count(&self) -> usize {
        self.machines
    }

    pub fn job_count(&self) -> usize {
        self.jobs.len()
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn job(&self, j: JobId) -> &Job {
        &self.jobs[j]
    }

    pub fn p(&self, j: JobId) -> &Rational {
        &self.jobs[j].p
    }

    pub fn allows(&self, j: JobId, machine: MachineId) -> bool {
        self.jobs[j].allows(machine)
    }

    /// Canonical indices of the jobs allowed on `machine`, ascending.
    pub fn jobs_allowed_on(&self, machine: MachineId) -> Vec<JobId> {
        (0..self.jobs.len()).filter(|&j| self.jobs[j].allows(machine)).collect()
    }

    /// `original_to_canonical()[pos]` is the canonical index of input job `pos`.
    pub fn original_to_canonical(&self) -> Vec<JobId> {
        let mut map = vec![0; self.jobs.len()];
        for (j, job) in self.jobs.iter().enumerate() {
            map[job.original] = j;
        }
        map
    }

    pub fn total_size(&self) -> Rational {
        self.jobs.iter().map(|j| &j.p).sum()
    }

    /// Divides every processing time by `t`.
    pub fn scale(&self, t: &Rational) -> Result<Instance, InstanceError> {
        if !t.is_positive() {
            return Err(InstanceError::NonPositiveScale(t.clone()));
        }
        let jobs = self
            .jobs
            .iter()
            .map(|job| Job {
                p: &job.p / t,
                allowed: job.allowed.clone(),
                original: job.original,
            })
            .collect();
        Ok(Instance {
            machines: self.machines,
            jobs,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let raw: RawInstance = serde_json::from_str(text)?;
        if raw.machines == 0 {
            return Err(InstanceError::NoMachines);
        }
        let mut jobs = Vec::with_capacity(raw.jobs.len());
        for (pos, rj) in raw.jobs.into_iter().enumerate() {
            let p: Rational =
                rj.p.parse()
                    .map_err(|source| InstanceError::BadRational { job: pos, source })?;
            let mut allowed = Vec::with_capacity(rj.allowed.len());
            for m in rj.allowed {
                if m < 0 || m as u64 >= raw.machines as u64 {
                    return Err(InstanceError::MachineOutOfRange {
                        job: pos,
                        machine: m,
                        machines: raw.machines,
                    });
                }
                allowed.push(m as usize);
            }
            jobs.push((p, allowed));
        }
        Instance::new(raw.machines, jobs)
    }

    /// Emits jobs in input order with reduced fractions.
    pub fn to_json(&self) -> String {
        let mut by_pos: Vec<&Job> = self.jobs.iter().collect();
        by_pos.sort_by_key(|j| j.original);
        let raw = RawInstance {
            machines: self.machines,
            jobs: by_pos
                .into_iter()
                .map(|j| RawJob {
                    p: j.p.to_string(),
                    allowed: j.allowed.iter().map(|&i| i as i64).collect(),
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("instance serialization")
    }

    /// Every distinct nonzero value `p(H)` over job subsets `H`, ascending.
    pub fn subset_sums(&self) -> Vec<Rational> {
        let mut sums = std::collections::BTreeSet::new();
        sums.insert(Rational::zero());
        for job in &self.jobs {
            let shifted: Vec<Rational> = sums.iter().map(|s| s + &job.p).collect();
            sums.extend(shifted);
        }
        sums.into_iter().filter(|s| !s.is_zero()).collect()
    }
}

/// Processing times are drawn uniformly from `grid`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeProfile {
    pub grid: Vec<Rational>,
}

impl SizeProfile {
    /// `{1/k, 2/k, …, k/k}`.
    pub fn uniform_grid(k: i64) -> Self {
        SizeProfile {
            grid: (1..=k).map(|a| Rational::new(a, k)).collect(),
        }
    }
}

impl Default for SizeProfile {
    fn default() -> Self {
        SizeProfile::uniform_grid(6)
    }
}

fn small_u64(x: &num_bigint::BigInt) -> Option<u64> {
    u64::try_from(x).ok()
}

/// Seeded random instance. One machine per job is drawn uniformly and always
/// allowed; each other machine is allowed independently with probability
/// `gamma_density`.
pub fn generate_random(
    machines: usize,
    jobs: usize,
    profile: &SizeProfile,
    gamma_density: &Rational,
    seed: u64,
) -> Result<Instance, InstanceError> {
    if machines == 0 || jobs == 0 {
        return Err(InstanceError::Generator("machines and jobs must be at least 1".into()));
    }
    if profile.grid.is_empty() || profile.grid.iter().any(|p| !p.is_positive()) {
        return Err(InstanceError::Generator(
            "size grid must be nonempty and positive".into(),
        ));
    }
    if !gamma_density.is_positive() || *gamma_density > Rational::one() {
        return Err(InstanceError::Generator(format!(
            "density must lie in (0, 1], got {gamma_density}"
        )));
    }
    let (num, den) = match (small_u64(gamma_density.numer()), small_u64(gamma_density.denom())) {
        (Some(n), Some(d)) => (n, d),
        _ => return Err(InstanceError::Generator("density fraction too large".into())),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(jobs);
    for _ in 0..jobs {
        let p = profile.grid.choose(&mut rng).expect("nonempty grid").clone();
        let anchor = rng.gen_range(0..machines);
        let mut allowed = vec![anchor];
        for i in 0..machines {
            if i != anchor && rng.gen_range(0..den) < num {
                allowed.push(i);
            }
        }
        out.push((p, allowed));
    }
    Instance::new(machines, out)
}
