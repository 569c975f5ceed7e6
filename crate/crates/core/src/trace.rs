//! The schedule produced by a simulation: physical run intervals,
//! completions, and the policy's own bookkeeping events.

use serde::{Deserialize, Serialize};

use crate::job::{Frac, JobId, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunInterval {
    pub machine: usize,
    pub job: JobId,
    pub start: Time,
    pub end: Time,
}

impl RunInterval {
    pub fn len(&self) -> Time {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Completion {
    pub job: JobId,
    pub time: Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// A pending job became viable; followed by its push/replace, if any.
    PseudoRelease,
    Push,
    /// `extra` holds the evicted job.
    Replace,
    CompletionPop,
    InfeasiblePop,
    WindowExpiry,
    /// High-laxity admission control decisions.
    Admit,
    Reject,
    /// A scheduler's own copy of the job reached zero remaining work.
    VirtualCompletion,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::PseudoRelease => "pseudo_release",
            EventKind::Push => "push",
            EventKind::Replace => "replace",
            EventKind::CompletionPop => "completion_pop",
            EventKind::InfeasiblePop => "infeasible_pop",
            EventKind::WindowExpiry => "window_expiry",
            EventKind::Admit => "admit",
            EventKind::Reject => "reject",
            EventKind::VirtualCompletion => "virtual_completion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolicyEvent {
    pub time: Time,
    pub kind: EventKind,
    pub job: JobId,
    pub machine: Option<usize>,
    pub extra: Option<i64>,
}

impl PolicyEvent {
    pub fn new(time: Time, kind: EventKind, job: JobId) -> Self {
        PolicyEvent {
            time,
            kind,
            job,
            machine: None,
            extra: None,
        }
    }

    pub fn on(mut self, machine: usize) -> Self {
        self.machine = Some(machine);
        self
    }

    pub fn with_extra(mut self, extra: i64) -> Self {
        self.extra = Some(extra);
        self
    }
}

/// A contiguous block of physical machines owned by one scheduler.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineGroup {
    pub policy: String,
    pub offset: usize,
    pub machines: usize,
}

impl MachineGroup {
    pub fn contains(&self, machine: usize) -> bool {
        machine >= self.offset && machine < self.offset + self.machines
    }
}

/// Parameters of the stack scheduler, when one took part in the run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackParams {
    pub variant: String,
    pub alpha: i64,
    pub viability_fraction: Frac,
    pub replace_fraction: Frac,
    pub strict_half_laxity: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceHeader {
    pub version: u32,
    pub instance_hash: String,
    pub policy: String,
    pub machines: usize,
    /// Internal ticks per original tick.
    pub tick_scale: i64,
    pub groups: Vec<MachineGroup>,
    pub stack: Option<StackParams>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub header: TraceHeader,
    /// Sorted by `(start, machine)`.
    pub intervals: Vec<RunInterval>,
    /// Sorted by `(time, job)`.
    pub completions: Vec<Completion>,
    /// In emission order; times are nondecreasing.
    pub events: Vec<PolicyEvent>,
}

impl Trace {
    pub fn completed_jobs(&self) -> usize {
        self.completions.len()
    }

    pub fn group(&self, policy: &str) -> Option<&MachineGroup> {
        self.header.groups.iter().find(|g| g.policy == policy)
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Total processing each job received, indexed by job id.
    pub fn processing_per_job(&self, n: usize) -> Vec<Time> {
        let mut work = vec![0; n];
        for iv in &self.intervals {
            if iv.job < n {
                work[iv.job] += iv.len();
            }
        }
        work
    }

    /// Restricts intervals to one machine.
    pub fn machine_intervals(&self, machine: usize) -> Vec<RunInterval> {
        self.intervals
            .iter()
            .copied()
            .filter(|iv| iv.machine == machine)
            .collect()
    }
}
