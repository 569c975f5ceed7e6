//! Scheduler slot for high-laxity jobs.
//!
//! The default occupant is earliest-deadline-first with admission control: a
//! released job is admitted only if EDF, replayed forward from the current
//! state, still finishes every admitted job on time. Admitted jobs are never
//! dropped. This stand-in carries no competitiveness guarantee.

use std::collections::BTreeSet;

use crate::engine::{Assignment, Policy, PolicyInfo, PolicyStats};
use crate::error::{Error, Result};
use crate::job::{Job, JobId, Time};
use crate::policy::Slots;
use crate::trace::{EventKind, MachineGroup, PolicyEvent};

pub const EDF: &str = "edf";

/// Names accepted by [`high_laxity_policy`].
pub const AVAILABLE: &[&str] = &[EDF];

/// Builds the named high-laxity scheduler on machines `offset..offset + machines`.
pub fn high_laxity_policy(name: &str, machines: usize, offset: usize) -> Result<Box<dyn Policy + Send>> {
    match name {
        EDF => Ok(Box::new(AdmissionEdf::with_offset(machines, offset))),
        other => Err(Error::Config(format!(
            "unknown high-laxity scheduler {other:?} (available: {})",
            AVAILABLE.join(", ")
        ))),
    }
}

/// Can `m` machines running global EDF finish every `(deadline, id, remaining)`
/// job, starting at `t`? Jobs are all available now.
pub fn edf_completes(t: Time, m: usize, jobs: &[(Time, JobId, Time)]) -> bool {
    if m == 0 {
        return jobs.is_empty();
    }
    let mut queue: Vec<(Time, JobId, Time)> = jobs.iter().copied().filter(|j| j.2 > 0).collect();
    queue.sort_unstable();
    let mut now = t;
    while !queue.is_empty() {
        let running = queue.len().min(m);
        let step = queue[..running].iter().map(|j| j.2).min().expect("non-empty");
        now += step;
        for j in &mut queue[..running] {
            j.2 -= step;
            if j.2 == 0 && now > j.0 {
                return false;
            }
        }
        // Priorities are static, so removing finished jobs keeps the order.
        queue.retain(|j| j.2 > 0);
    }
    true
}

#[derive(Debug, Clone)]
pub struct AdmissionEdf {
    machines: usize,
    offset: usize,
    remaining: Vec<Time>,
    deadline: Vec<Time>,
    admitted: BTreeSet<(Time, JobId)>,
    arrivals: Vec<JobId>,
    slots: Slots,
    stats: PolicyStats,
}

impl AdmissionEdf {
    pub fn new(machines: usize) -> Self {
        AdmissionEdf::with_offset(machines, 0)
    }

    pub fn with_offset(machines: usize, offset: usize) -> Self {
        AdmissionEdf {
            machines,
            offset,
            remaining: Vec::new(),
            deadline: Vec::new(),
            admitted: BTreeSet::new(),
            arrivals: Vec::new(),
            slots: Slots::new(machines),
            stats: PolicyStats {
                policy: EDF.into(),
                ..Default::default()
            },
        }
    }

    fn admissible(&self, t: Time, candidate: JobId) -> bool {
        let mut jobs: Vec<(Time, JobId, Time)> = self
            .admitted
            .iter()
            .map(|&(d, j)| (d, j, self.remaining[j]))
            .collect();
        jobs.push((self.deadline[candidate], candidate, self.remaining[candidate]));
        edf_completes(t, self.machines, &jobs)
    }
}

impl Policy for AdmissionEdf {
    fn info(&self) -> PolicyInfo {
        PolicyInfo {
            name: EDF.into(),
            groups: vec![MachineGroup {
                policy: EDF.into(),
                offset: self.offset,
                machines: self.machines,
            }],
            stack: None,
        }
    }

    fn machines(&self) -> usize {
        self.offset + self.machines
    }

    fn on_release(&mut self, job: &Job, _t: Time) {
        if self.remaining.len() <= job.id {
            self.remaining.resize(job.id + 1, 0);
            self.deadline.resize(job.id + 1, 0);
        }
        self.remaining[job.id] = job.size;
        self.deadline[job.id] = job.deadline;
        self.arrivals.push(job.id);
    }

    fn on_boundary(&mut self, t: Time, log: &mut Vec<PolicyEvent>) {
        let finished: Vec<(usize, JobId)> = self
            .slots
            .iter()
            .filter(|&(_, j)| self.remaining[j] == 0)
            .collect();
        for (slot, job) in finished {
            self.slots.clear(slot);
            self.admitted.remove(&(self.deadline[job], job));
            self.stats.virtual_completions += 1;
            log.push(PolicyEvent::new(t, EventKind::VirtualCompletion, job).on(self.offset + slot));
        }

        let mut arrivals = std::mem::take(&mut self.arrivals);
        arrivals.sort_unstable();
        for job in arrivals {
            if self.admissible(t, job) {
                self.admitted.insert((self.deadline[job], job));
                log.push(PolicyEvent::new(t, EventKind::Admit, job));
            } else {
                log.push(PolicyEvent::new(t, EventKind::Reject, job));
            }
        }

        let chosen: Vec<JobId> = self.admitted.iter().take(self.machines).map(|&(_, j)| j).collect();
        let running: Vec<(usize, JobId)> = self.slots.iter().collect();
        for (slot, job) in running {
            if !chosen.contains(&job) {
                self.slots.clear(slot);
            }
        }
        for job in chosen {
            if !self.slots.contains(job) {
                self.slots.place(job);
            }
        }
    }

    fn run_set(&self, _t: Time, physical: &[Time]) -> Vec<Assignment> {
        self.slots
            .iter()
            .filter(|&(_, job)| physical.get(job).is_none_or(|&p| p > 0))
            .map(|(slot, job)| Assignment {
                machine: self.offset + slot,
                job,
            })
            .collect()
    }

    fn next_event(&self, t: Time) -> Option<Time> {
        self.slots.iter().map(|(_, j)| t + self.remaining[j]).min()
    }

    fn advance(&mut self, from: Time, to: Time) {
        let dt = to - from;
        for (_, job) in self.slots.iter() {
            self.remaining[job] -= dt;
        }
    }

    fn stats(&self) -> Vec<PolicyStats> {
        vec![self.stats.clone()]
    }

    fn check_invariants(&self, t: Time, _physical: &[Time]) -> std::result::Result<(), String> {
        let jobs: Vec<(Time, JobId, Time)> = self
            .admitted
            .iter()
            .map(|&(d, j)| (d, j, self.remaining[j]))
            .collect();
        if edf_completes(t, self.machines, &jobs) {
            Ok(())
        } else {
            Err("admitted set is no longer EDF-schedulable".into())
        }
    }
}
