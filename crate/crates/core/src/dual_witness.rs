//! Infeasibility certificates from stuck local-search states.
//!
//! Given a stuck state on the scaled instance, set `z_j = min(p_j, 5/6)` for
//! active jobs and `0` otherwise, and `y_i = z(A_i)` adjusted by `+1/6` on
//! big-to-any machines and `−1/6` on small-to-any machines, where `A_i` are the
//! active jobs on machine `i`. This point has negative objective and is
//! dual-feasible at makespan 1, so the configuration-LP is infeasible at the
//! attempted `T`.
//!
//! Feasibility is not taken on trust: [`certify`] checks every machine with an
//! exact knapsack maximization through [`crate::config_lp::verify_dual`].

use serde::Serialize;

use crate::config_lp::{by_original, verify_dual, ConfigLpError, DualSolution};
use crate::instance::{MachineId, Rational};
use crate::local_search::{BlockerType, StateView, StuckState};

#[derive(Debug, thiserror::Error)]
pub enum WitnessError {
    #[error("state is not stuck: {0}")]
    NotStuck(String),
    #[error("machine {0} hosts both a small-to-any and a big-to-any blocker")]
    OverlappingMachines(MachineId),
    #[error("y[{machine}] = {value} is negative")]
    NegativeY { machine: MachineId, value: Rational },
    #[error(transparent)]
    Lp(#[from] ConfigLpError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// Against the scaled instance (target makespan 1).
    pub dual: DualSolution,
    /// The unscaled `T` being refuted.
    pub scale_t: Rational,
    /// `M(B_S)`
    pub small_to_any_machines: Vec<MachineId>,
    /// `M(B_BS)`
    pub big_to_any_machines: Vec<MachineId>,
}

pub fn build_witness(stuck: &StuckState) -> Result<Witness, WitnessError> {
    stuck.verify().map_err(WitnessError::NotStuck)?;
    let inst = &stuck.instance;
    let view = StateView::new(inst, &stuck.state);

    let cap_z = Rational::new(5, 6);
    let sixth = Rational::new(1, 6);
    let z: Vec<Rational> = (0..inst.job_count())
        .map(|j| {
            if view.is_active(j) {
                inst.p(j).clone().min(cap_z.clone())
            } else {
                Rational::zero()
            }
        })
        .collect();

    let s_machines = view.machines_with(BlockerType::SmallToAny);
    let bs_machines = view.machines_with(BlockerType::BigToAny);
    if let Some(&i) = s_machines.iter().find(|i| bs_machines.contains(i)) {
        return Err(WitnessError::OverlappingMachines(i));
    }

    let mut y = Vec::with_capacity(inst.machine_count());
    for i in 0..inst.machine_count() {
        let base: Rational = stuck
            .state
            .schedule
            .jobs_on(i)
            .filter(|&j| view.is_active(j))
            .map(|j| &z[j])
            .sum();
        let value = if bs_machines.contains(&i) {
            base + &sixth
        } else if s_machines.contains(&i) {
            base - &sixth
        } else {
            base
        };
        if value.is_negative() {
            return Err(WitnessError::NegativeY { machine: i, value });
        }
        y.push(value);
    }

    Ok(Witness {
        dual: DualSolution { y, z },
        scale_t: stuck.t.clone(),
        small_to_any_machines: s_machines,
        big_to_any_machines: bs_machines,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub witness: Witness,
    /// `Σ y − Σ z`
    pub objective: Rational,
    /// Objective is negative.
    pub claim1: bool,
    /// Dual-feasible at makespan 1 on the scaled instance.
    pub claim2: bool,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.claim1 && self.claim2
    }

    /// `|M(B_BS)| ≤ |M(B_S)|`
    pub fn counting_bound_holds(&self) -> bool {
        self.witness.big_to_any_machines.len() <= self.witness.small_to_any_machines.len()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateFile {
    #[serde(rename = "T")]
    pub t: Rational,
    pub z: Vec<Rational>,
    pub y: Vec<Rational>,
    pub objective: Rational,
    pub claim1: bool,
    pub claim2: bool,
}

/// Builds the witness and evaluates both claims; both are always evaluated.
pub fn certify(stuck: &StuckState) -> Result<Certificate, WitnessError> {
    let witness = build_witness(stuck)?;
    let objective = witness.dual.objective();
    let claim1 = objective.is_negative();
    let check = verify_dual(&stuck.instance, &Rational::one(), &witness.dual)?;
    Ok(Certificate {
        objective,
        claim1,
        claim2: check.feasible,
        witness,
    })
}

/// Refutes `T` directly when some job exceeds it: that job lies in no
/// configuration, so `z = e_j`, `y = 0` is dual feasible with objective `−1`.
/// `None` if every scaled size is at most 1.
pub fn oversized_job_certificate(stuck: &StuckState) -> Result<Option<Certificate>, WitnessError> {
    let inst = &stuck.instance;
    let Some(j) = (0..inst.job_count()).rev().find(|&j| *inst.p(j) > Rational::one()) else {
        return Ok(None);
    };
    let mut dual = DualSolution::zero(inst);
    dual.z[j] = Rational::one();
    let objective = dual.objective();
    let check = verify_dual(inst, &Rational::one(), &dual)?;
    Ok(Some(Certificate {
        claim1: objective.is_negative(),
        claim2: check.feasible,
        objective,
        witness: Witness {
            dual,
            scale_t: stuck.t.clone(),
            small_to_any_machines: Vec::new(),
            big_to_any_machines: Vec::new(),
        },
    }))
}

/// The blocker-tree witness needs every scaled size to be at most 1; below
/// the largest job size the oversized-job certificate is used instead.
pub fn certify_stuck(stuck: &StuckState) -> Result<Certificate, WitnessError> {
    stuck.verify().map_err(WitnessError::NotStuck)?;
    match oversized_job_certificate(stuck)? {
        Some(cert) => Ok(cert),
        None => certify(stuck),
    }
}

impl Certificate {
    pub fn to_file(&self, stuck: &StuckState) -> CertificateFile {
        CertificateFile {
            t: self.witness.scale_t.clone(),
            z: by_original(&stuck.instance, &self.witness.dual.z),
            y: self.witness.dual.y.clone(),
            objective: self.objective.clone(),
            claim1: self.claim1,
            claim2: self.claim2,
        }
    }
}
