use std::io::Write;

use serde::Serialize;

use crate::instance::{Instance, JobId, MachineId};

use super::types::{Activator, BlockerType, MoveValue, SearchState};

/// One loop iteration of `extend`. Job indices are canonical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    AddBlocker {
        job: JobId,
        machine: MachineId,
        kind: BlockerType,
        value: MoveValue,
        activator: Activator,
        position: usize,
    },
    PerformMove {
        job: JobId,
        from: Option<MachineId>,
        to: MachineId,
        blocker: usize,
        activator: Activator,
        /// Tree length after the suffix deletion.
        kept: usize,
        completed: bool,
    },
    Stuck {
        j_new: JobId,
        tree_len: usize,
    },
}

#[derive(Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum TraceJson {
    AddBlocker {
        job: usize,
        machine: MachineId,
        #[serde(rename = "type")]
        kind: BlockerType,
        value: [i64; 2],
        activator: Option<usize>,
        position: usize,
    },
    PerformMove {
        job: usize,
        from: Option<MachineId>,
        to: MachineId,
        blocker: usize,
        activator: Option<usize>,
        kept: usize,
        completed: bool,
    },
    Stuck {
        j_new: usize,
        tree_len: usize,
    },
}

fn activator_json(a: Activator) -> Option<usize> {
    match a {
        Activator::Root => None,
        Activator::Blocker(k) => Some(k),
    }
}

impl TraceEvent {
    /// One JSON object; jobs by input position, blocker positions 0-based.
    pub fn to_json(&self, inst: &Instance) -> String {
        let orig = |j: JobId| inst.job(j).original;
        let json = match *self {
            TraceEvent::AddBlocker {
                job,
                machine,
                kind,
                value,
                activator,
                position,
            } => TraceJson::AddBlocker {
                job: orig(job),
                machine,
                kind,
                value: [value.rank as i64, value.tiebreak],
                activator: activator_json(activator),
                position,
            },
            TraceEvent::PerformMove {
                job,
                from,
                to,
                blocker,
                activator,
                kept,
                completed,
            } => TraceJson::PerformMove {
                job: orig(job),
                from,
                to,
                blocker,
                activator: activator_json(activator),
                kept,
                completed,
            },
            TraceEvent::Stuck { j_new, tree_len } => TraceJson::Stuck {
                j_new: orig(j_new),
                tree_len,
            },
        };
        serde_json::to_string(&json).expect("trace serialization")
    }
}

/// Hooks called by `extend`.
pub trait SearchObserver {
    /// At the top of every loop iteration, before any action.
    fn on_iteration(&mut self, _inst: &Instance, _state: &SearchState) {}
    fn on_event(&mut self, _inst: &Instance, _event: &TraceEvent) {}
}

impl SearchObserver for () {}

/// Writes line-delimited JSON events.
pub struct JsonTrace<W: Write> {
    out: W,
    original_instance: Instance,
}

impl<W: Write> JsonTrace<W> {
    pub fn new(out: W, inst: &Instance) -> Self {
        JsonTrace {
            out,
            original_instance: inst.clone(),
        }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> SearchObserver for JsonTrace<W> {
    fn on_event(&mut self, _inst: &Instance, event: &TraceEvent) {
        // trace output is best effort
        let _ = writeln!(self.out, "{}", event.to_json(&self.original_instance));
    }
}

/// Collects events in memory.
#[derive(Default)]
pub struct EventLog {
    pub events: Vec<TraceEvent>,
}

impl SearchObserver for EventLog {
    fn on_event(&mut self, _inst: &Instance, event: &TraceEvent) {
        self.events.push(event.clone());
    }
}
