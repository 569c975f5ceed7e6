//! Shortest remaining processing time among feasible jobs.

use std::collections::BTreeSet;

use crate::engine::{Assignment, Policy, PolicyInfo, PolicyStats};
use crate::job::{is_feasible, Job, JobId, Time};
use crate::policy::Slots;
use crate::trace::{EventKind, MachineGroup, PolicyEvent};

pub const NAME: &str = "srpt";

/// Runs the `m` feasible jobs with the least remaining work.
///
/// Waiting jobs sit in an ordered index keyed by remaining work; running
/// jobs are pulled out of it while they run, so the index never needs
/// rekeying between events. Ties go to the job that is already running,
/// then to the smaller id.
#[derive(Debug, Clone)]
pub struct Srpt {
    machines: usize,
    offset: usize,
    remaining: Vec<Time>,
    deadline: Vec<Time>,
    waiting: BTreeSet<(Time, JobId)>,
    slots: Slots,
    chosen_mark: Vec<bool>,
    log_completions: bool,
    virtual_completions: usize,
}

impl Srpt {
    pub fn new(machines: usize) -> Self {
        Srpt::with_offset(machines, 0)
    }

    /// An instance bound to physical machines `offset..offset + machines`.
    pub fn with_offset(machines: usize, offset: usize) -> Self {
        Srpt {
            machines,
            offset,
            remaining: Vec::new(),
            deadline: Vec::new(),
            waiting: BTreeSet::new(),
            slots: Slots::new(machines),
            chosen_mark: Vec::new(),
            log_completions: false,
            virtual_completions: 0,
        }
    }

    /// Emit a `virtual_completion` event whenever this copy finishes a job.
    pub fn logging_completions(mut self) -> Self {
        self.log_completions = true;
        self
    }

    /// This scheduler's remaining work for `job`, if it has seen the job.
    pub fn remaining(&self, job: JobId) -> Option<Time> {
        self.remaining.get(job).copied().filter(|&r| r >= 0)
    }

    pub fn is_running(&self, job: JobId) -> bool {
        self.slots.contains(job)
    }

    pub fn running(&self) -> impl Iterator<Item = (usize, JobId)> + '_ {
        self.slots.iter()
    }

    pub fn virtual_completions(&self) -> usize {
        self.virtual_completions
    }

    fn track(&mut self, job: &Job) {
        if self.remaining.len() <= job.id {
            self.remaining.resize(job.id + 1, -1);
            self.deadline.resize(job.id + 1, 0);
            self.chosen_mark.resize(job.id + 1, false);
        }
        self.remaining[job.id] = job.size;
        self.deadline[job.id] = job.deadline;
    }

    /// Selects the next run set at `t` from scratch.
    fn select(&mut self, t: Time) -> Vec<JobId> {
        // Running jobs compete with a tie-break advantage.
        let mut chosen: Vec<JobId> = Vec::with_capacity(self.machines);
        let mut running: Vec<(Time, JobId)> = self
            .slots
            .iter()
            .map(|(_, j)| (self.remaining[j], j))
            .filter(|&(r, j)| is_feasible(r, self.deadline[j], t))
            .collect();
        running.sort_unstable();
        let mut run_iter = running.into_iter().peekable();
        let mut dead = Vec::new();
        let mut wait_iter = self.waiting.iter().peekable();
        while chosen.len() < self.machines {
            // Skip infeasible waiting jobs; they can never become feasible again.
            while let Some(&&(r, j)) = wait_iter.peek() {
                if is_feasible(r, self.deadline[j], t) {
                    break;
                }
                dead.push((r, j));
                wait_iter.next();
            }
            let take_running = match (run_iter.peek(), wait_iter.peek()) {
                (Some(&(rr, _)), Some(&&(wr, _))) => rr <= wr,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => break,
            };
            if take_running {
                chosen.push(run_iter.next().unwrap().1);
            } else {
                chosen.push(wait_iter.next().unwrap().1);
            }
        }
        for key in dead {
            self.waiting.remove(&key);
        }
        chosen
    }
}

impl Policy for Srpt {
    fn info(&self) -> PolicyInfo {
        PolicyInfo {
            name: NAME.into(),
            groups: vec![MachineGroup {
                policy: NAME.into(),
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
        self.track(job);
        self.waiting.insert((job.size, job.id));
    }

    fn on_boundary(&mut self, t: Time, log: &mut Vec<PolicyEvent>) {
        // Retire finished jobs.
        let finished: Vec<(usize, JobId)> = self
            .slots
            .iter()
            .filter(|&(_, j)| self.remaining[j] == 0)
            .collect();
        for (slot, job) in finished {
            self.slots.clear(slot);
            self.virtual_completions += 1;
            if self.log_completions {
                log.push(
                    PolicyEvent::new(t, EventKind::VirtualCompletion, job).on(self.offset + slot),
                );
            }
        }

        let chosen = self.select(t);
        // Everything that was running and lost its slot goes back to waiting.
        for &job in &chosen {
            self.chosen_mark[job] = true;
        }
        for slot in 0..self.machines {
            if let Some(job) = self.slots.get(slot) {
                if !self.chosen_mark[job] {
                    self.slots.clear(slot);
                    if is_feasible(self.remaining[job], self.deadline[job], t) {
                        self.waiting.insert((self.remaining[job], job));
                    }
                }
            }
        }
        for job in chosen {
            self.chosen_mark[job] = false;
            if !self.slots.contains(job) {
                self.waiting.remove(&(self.remaining[job], job));
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
            debug_assert!(self.remaining[job] >= 0);
        }
    }

    fn stats(&self) -> Vec<PolicyStats> {
        vec![PolicyStats {
            policy: NAME.into(),
            virtual_completions: self.virtual_completions,
            ..Default::default()
        }]
    }

    fn check_invariants(&self, t: Time, _physical: &[Time]) -> Result<(), String> {
        // Exchange property: nothing waiting and feasible beats a running job.
        let worst_running = self.slots.iter().map(|(_, j)| self.remaining[j]).max();
        if self.slots.len() < self.machines {
            if let Some(&(r, j)) = self
                .waiting
                .iter()
                .find(|&&(r, j)| is_feasible(r, self.deadline[j], t))
            {
                return Err(format!("srpt idles a machine while job {j} (remaining {r}) is feasible"));
            }
        } else if let Some(worst) = worst_running {
            if let Some(&(r, j)) = self
                .waiting
                .iter()
                .find(|&&(r, j)| is_feasible(r, self.deadline[j], t))
            {
                if r < worst {
                    return Err(format!(
                        "srpt runs a job with remaining {worst} while job {j} has {r}"
                    ));
                }
            }
        }
        for (_, j) in self.slots.iter() {
            if !is_feasible(self.remaining[j], self.deadline[j], t) {
                return Err(format!("srpt runs infeasible job {j}"));
            }
        }
        Ok(())
    }
}

/// One selection step, exposed for direct testing: `(remaining, id)` pairs
/// of feasible candidates in, chosen ids out.
pub fn srpt_run_set(candidates: &[(Time, JobId)], machines: usize) -> Vec<JobId> {
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.into_iter().take(machines).map(|(_, j)| j).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, SimConfig};
    use crate::job::Instance;
    use crate::trace::{Completion, RunInterval};

    #[test]
    fn run_set_examples() {
        let mut got = srpt_run_set(&[(5, 0), (2, 1), (9, 2)], 2);
        got.sort();
        assert_eq!(got, vec![0, 1]);
        assert_eq!(srpt_run_set(&[(3, 7)], 4), vec![7]);
        assert_eq!(srpt_run_set(&[(4, 1), (4, 0)], 1), vec![0]);
    }

    #[test]
    fn lone_job() {
        let inst = Instance::from_original(&[(0, 2, 4)], 1, "").unwrap();
        let trace = simulate(&inst, &mut Srpt::new(1), &SimConfig::default()).unwrap();
        assert_eq!(
            trace.intervals,
            vec![RunInterval { machine: 0, job: 0, start: 0, end: 4 }]
        );
        assert_eq!(trace.completions, vec![Completion { job: 0, time: 4 }]);
    }

    #[test]
    fn two_jobs_two_machines() {
        let inst = Instance::from_original(&[(0, 2, 4), (0, 2, 4)], 2, "").unwrap();
        let trace = simulate(&inst, &mut Srpt::new(2), &SimConfig::default()).unwrap();
        assert_eq!(trace.completions.len(), 2);
        assert!(trace.completions.iter().all(|c| c.time == 4));
    }

    #[test]
    fn equal_remaining_prefers_lower_id() {
        let inst = Instance::from_original(&[(0, 4, 20), (0, 4, 20)], 1, "").unwrap();
        let trace = simulate(&inst, &mut Srpt::new(1), &SimConfig::default()).unwrap();
        assert_eq!(trace.intervals[0].job, 0);
        assert_eq!(trace.completions[0], Completion { job: 0, time: 8 });
    }

    #[test]
    fn shorter_release_preempts() {
        // Job 1 arrives shorter than job 0's remaining work.
        let inst = Instance::from_original(&[(0, 10, 30), (2, 3, 30)], 1, "").unwrap();
        let trace = simulate(&inst, &mut Srpt::new(1), &SimConfig::default()).unwrap();
        assert_eq!(trace.intervals.len(), 3);
        assert_eq!(trace.completions[0], Completion { job: 1, time: 10 });
        assert_eq!(trace.completions[1], Completion { job: 0, time: 26 });
    }

    #[test]
    fn infeasible_jobs_are_skipped() {
        // Job 0 is displaced by two shorter jobs until it can no longer finish.
        let inst = Instance::from_original(&[(0, 5, 6), (0, 3, 3), (3, 3, 6)], 1, "").unwrap();
        let trace = simulate(&inst, &mut Srpt::new(1), &SimConfig::default()).unwrap();
        let done: Vec<_> = trace.completions.iter().map(|c| c.job).collect();
        assert_eq!(done, vec![1, 2]);
        assert!(trace.intervals.iter().all(|iv| iv.job != 0));
    }

    #[test]
    fn invariants_hold_on_a_busy_instance() {
        let triples: Vec<_> = (0..40).map(|i| (i % 7, 1 + (i * 5) % 9, i % 7 + 1 + (i * 5) % 9 + i % 4)).collect();
        let inst = Instance::from_original(&triples, 3, "").unwrap();
        let cfg = SimConfig { check_invariants: true, ..Default::default() };
        simulate(&inst, &mut Srpt::new(3), &cfg).unwrap();
    }
}
