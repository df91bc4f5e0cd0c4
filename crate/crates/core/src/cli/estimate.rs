use serde::Serialize;

use crate::dual_witness::{certify_stuck, CertificateFile, WitnessError};
use crate::instance::{Instance, Rational};
use crate::local_search::{
    capacity, run, InsertionOrder, LocalSearchError, RunOutcome, Schedule, ScheduleFile, SearchOptions,
};

#[derive(Debug, thiserror::Error)]
pub enum EstimateError {
    #[error(transparent)]
    Search(#[from] LocalSearchError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error("stuck at T = {t} but the certificate fails (claim1 = {claim1}, claim2 = {claim2})")]
    Uncertified { t: Rational, claim1: bool, claim2: bool },
    #[error("run did not complete at T = {0}, the total size")]
    TopProbeStuck(Rational),
}

/// One probe of the binary search.
#[derive(Debug, Clone, Serialize)]
pub struct Probe {
    #[serde(rename = "T")]
    pub t: Rational,
    pub completed: bool,
}

#[derive(Debug, Clone)]
pub struct Estimate {
    /// Largest probed grid value certified infeasible.
    pub t_lo: Option<Rational>,
    /// Smallest probed grid value where the run completed.
    pub t_hi: Rational,
    /// `(11/6)·T_hi`
    pub estimate: Rational,
    pub schedule: Schedule,
    pub certificate: Option<CertificateFile>,
    pub probes: Vec<Probe>,
}

#[derive(Serialize)]
pub struct EstimateFile {
    #[serde(rename = "T_lo")]
    pub t_lo: Option<Rational>,
    #[serde(rename = "T_hi")]
    pub t_hi: Rational,
    pub estimate: Rational,
    pub schedule: ScheduleFile,
    pub certificate: Option<CertificateFile>,
    pub probes: Vec<Probe>,
}

impl Estimate {
    pub fn to_file(&self, inst: &Instance) -> EstimateFile {
        EstimateFile {
            t_lo: self.t_lo.clone(),
            t_hi: self.t_hi.clone(),
            estimate: self.estimate.clone(),
            schedule: self.schedule.to_file(inst),
            certificate: self.certificate.clone(),
            probes: self.probes.clone(),
        }
    }
}

/// Binary search over the subset-sum grid. The largest grid value (the total
/// size) always completes; every stuck probe must certify, through the
/// oversized-job certificate when the probe is below the largest job size.
pub fn estimate(inst: &Instance, order: InsertionOrder, opts: &SearchOptions) -> Result<Estimate, EstimateError> {
    let grid = inst.subset_sums();
    let top = grid.len() - 1;
    let mut probes = Vec::new();

    let probe = |k: usize, probes: &mut Vec<Probe>| -> Result<Result<Schedule, CertificateFile>, EstimateError> {
        let t = &grid[k];
        let outcome = run(inst, t, order, opts, &mut ())?;
        probes.push(Probe {
            t: t.clone(),
            completed: outcome.schedule().is_some(),
        });
        match outcome {
            RunOutcome::Complete(s) => Ok(Ok(s)),
            RunOutcome::Stuck { stuck, .. } => {
                let cert = certify_stuck(&stuck)?;
                if !cert.holds() {
                    return Err(EstimateError::Uncertified {
                        t: t.clone(),
                        claim1: cert.claim1,
                        claim2: cert.claim2,
                    });
                }
                Ok(Err(cert.to_file(&stuck)))
            }
        }
    };

    let mut best = match probe(top, &mut probes)? {
        Ok(s) => s,
        Err(_) => return Err(EstimateError::TopProbeStuck(grid[top].clone())),
    };
    // lo: index of a certified value (or none), hi: index of a completed one
    let mut lo: Option<usize> = None;
    let mut lo_cert = None;
    let mut hi = top;
    loop {
        let start = lo.map_or(0, |l| l + 1);
        if start >= hi {
            break;
        }
        let mid = start + (hi - start) / 2;
        match probe(mid, &mut probes)? {
            Ok(s) => {
                hi = mid;
                best = s;
            }
            Err(cert) => {
                lo = Some(mid);
                lo_cert = Some(cert);
            }
        }
    }
    Ok(Estimate {
        t_lo: lo.map(|l| grid[l].clone()),
        t_hi: grid[hi].clone(),
        estimate: capacity() * &grid[hi],
        schedule: best,
        certificate: lo_cert,
        probes,
    })
}
