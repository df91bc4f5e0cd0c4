//! Restricted Assignment makespan scheduling with the configuration-LP.
//!
//! * [`instance`]: exact-rational instances, scaling, generation.
//! * [`config_lp`]: configuration enumeration, exact phase-1 simplex, `OPT*`,
//!   primal and dual verification.
//! * [`local_search`]: the blocker-tree local search that extends a schedule
//!   one job at a time while keeping every machine at most `11/6 · T`.
//! * [`dual_witness`]: dual certificates built from stuck search states.
//! * [`oracle`]: brute-force optimum and an independent potential-move evaluator.
//! * [`cli`]: the `ragap` command line.

pub mod cli;
pub mod config_lp;
pub mod dual_witness;
pub mod instance;
pub mod local_search;
pub mod oracle;

pub use instance::{Instance, Rational};
