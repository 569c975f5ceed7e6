//! Event-driven simulation kernel.
//!
//! Time jumps from one event to the next. Between events the run set is
//! fixed and every running job loses one unit of remaining work per tick.
//! Policies are asked for a new run set only at event times, so a policy
//! must expose every instant at which its decision could change through
//! [`Policy::next_event`].

use crate::error::{Error, Result};
use crate::formats::instance_hash;
use crate::job::{Instance, Job, JobId, Time, TICK_SCALE};
use crate::trace::{Completion, MachineGroup, PolicyEvent, RunInterval, StackParams, Trace, TraceHeader};

/// One physical machine running one job until the next event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    pub machine: usize,
    pub job: JobId,
}

/// Static description of a policy, copied into the trace header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyInfo {
    pub name: String,
    pub groups: Vec<MachineGroup>,
    pub stack: Option<StackParams>,
}

/// Counters a policy reports at the end of a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PolicyStats {
    pub policy: String,
    pub virtual_completions: usize,
    pub pushes: usize,
    pub replaces: usize,
    pub completion_pops: usize,
    pub infeasible_pops: usize,
}

/// The contract between the kernel and a scheduling policy.
///
/// At each event time the kernel delivers releases, calls
/// [`on_boundary`](Policy::on_boundary), then reads [`run_set`](Policy::run_set).
/// Policies track their own view of remaining work and update it in
/// [`advance`](Policy::advance).
pub trait Policy {
    fn info(&self) -> PolicyInfo;

    /// Physical machines this policy may use (`0..machines()`).
    fn machines(&self) -> usize;

    fn on_release(&mut self, job: &Job, t: Time);

    /// Called by the kernel when a job's physical work runs out.
    fn on_completion(&mut self, _job: JobId, _machine: usize, _t: Time) {}

    /// Processes everything that happens at `t`: own completions,
    /// stack updates, admissions, selection of the next run set.
    fn on_boundary(&mut self, t: Time, log: &mut Vec<PolicyEvent>);

    /// Jobs to run from `t` until the next event. `physical` holds the
    /// kernel's remaining work per job.
    fn run_set(&self, t: Time, physical: &[Time]) -> Vec<Assignment>;

    /// Earliest self-generated event strictly after `t` (own completions,
    /// window expiries), assuming the current run set persists.
    fn next_event(&self, t: Time) -> Option<Time>;

    /// Applies unit-rate processing to the policy's view over `[from, to)`.
    fn advance(&mut self, from: Time, to: Time);

    fn stats(&self) -> Vec<PolicyStats>;

    /// Cross-checks internal state against the kernel's physical view.
    fn check_invariants(&self, _t: Time, _physical: &[Time]) -> std::result::Result<(), String> {
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimConfig {
    /// Extra event times at which nothing happens; the trace must not change.
    pub noop_events: Vec<Time>,
    /// Call [`Policy::check_invariants`] at every event.
    pub check_invariants: bool,
}

/// Earliest upcoming event: next release, the soonest completion among
/// running jobs (`t + remaining`), or a policy-registered time.
pub fn next_event_time(
    t: Time,
    next_release: Option<Time>,
    running_remaining: impl IntoIterator<Item = Time>,
    policy_next: Option<Time>,
) -> Option<Time> {
    let completion = running_remaining.into_iter().map(|r| t + r).min();
    [next_release, completion, policy_next].into_iter().flatten().min()
}

/// Runs `policy` on `instance` and returns the physical trace.
pub fn simulate(instance: &Instance, policy: &mut dyn Policy, config: &SimConfig) -> Result<Trace> {
    let m = instance.machines;
    if policy.machines() > m {
        return Err(Error::Config(format!(
            "policy uses {} machines but the instance has {m}",
            policy.machines()
        )));
    }
    let info = policy.info();
    let header = TraceHeader {
        version: 1,
        instance_hash: instance_hash(instance),
        policy: info.name,
        machines: m,
        tick_scale: TICK_SCALE,
        groups: info.groups,
        stack: info.stack,
    };

    let n = instance.len();
    let mut physical: Vec<Time> = instance.jobs.iter().map(|j| j.size).collect();
    let mut order: Vec<JobId> = (0..n).collect();
    order.sort_by_key(|&id| (instance.jobs[id].release, id));
    let mut noops = config.noop_events.clone();
    noops.sort_unstable();
    noops.dedup();

    let mut intervals = Vec::new();
    let mut completions = Vec::new();
    let mut events = Vec::new();
    // Open interval per machine: (job, start).
    let mut open: Vec<Option<(JobId, Time)>> = vec![None; m];
    let mut next_idx = 0;
    let mut noop_idx = 0;
    let mut t = match order.first() {
        Some(&id) => instance.jobs[id].release,
        None => return Ok(finish(header, intervals, completions, events)),
    };
    let mut seen = vec![false; m];
    let mut in_set = vec![false; n];

    loop {
        while next_idx < n && instance.jobs[order[next_idx]].release == t {
            policy.on_release(&instance.jobs[order[next_idx]], t);
            next_idx += 1;
        }
        while noop_idx < noops.len() && noops[noop_idx] <= t {
            noop_idx += 1;
        }
        policy.on_boundary(t, &mut events);
        if config.check_invariants {
            policy
                .check_invariants(t, &physical)
                .map_err(|reason| Error::PolicyViolation { time: t, reason })?;
        }

        let run = policy.run_set(t, &physical);
        check_run_set(instance, &run, &physical, t, &mut seen, &mut in_set)?;

        let mut next_job: Vec<Option<JobId>> = vec![None; m];
        for a in &run {
            next_job[a.machine] = Some(a.job);
        }
        for machine in 0..m {
            let keep = matches!((open[machine], next_job[machine]), (Some((a, _)), Some(b)) if a == b);
            if keep {
                continue;
            }
            if let Some((job, start)) = open[machine].take() {
                if t > start {
                    intervals.push(RunInterval { machine, job, start, end: t });
                }
            }
            open[machine] = next_job[machine].map(|job| (job, t));
        }

        let next_release = order.get(next_idx).map(|&id| instance.jobs[id].release);
        let policy_next = policy.next_event(t);
        if let Some(p) = policy_next {
            if p <= t {
                return Err(Error::PolicyViolation {
                    time: t,
                    reason: format!("policy registered a non-future event at {p}"),
                });
            }
        }
        let Some(mut next) = next_event_time(
            t,
            next_release,
            run.iter().map(|a| physical[a.job]),
            policy_next,
        ) else {
            break;
        };
        if let Some(&noop) = noops.get(noop_idx) {
            next = next.min(noop);
        }

        let dt = next - t;
        for a in &run {
            physical[a.job] -= dt;
            if physical[a.job] == 0 {
                completions.push(Completion { job: a.job, time: next });
                policy.on_completion(a.job, a.machine, next);
            }
        }
        policy.advance(t, next);
        t = next;
    }

    for (machine, slot) in open.iter_mut().enumerate() {
        if let Some((job, start)) = slot.take() {
            if t > start {
                intervals.push(RunInterval { machine, job, start, end: t });
            }
        }
    }
    Ok(finish(header, intervals, completions, events))
}

fn check_run_set(
    instance: &Instance,
    run: &[Assignment],
    physical: &[Time],
    t: Time,
    seen_machine: &mut [bool],
    seen_job: &mut [bool],
) -> Result<()> {
    let m = instance.machines;
    let violation = |reason: String| Error::PolicyViolation { time: t, reason };
    if run.len() > m {
        return Err(violation(format!("run set has {} jobs for {m} machines", run.len())));
    }
    let mut result = Ok(());
    for a in run {
        if a.machine >= m {
            result = Err(violation(format!("machine {} out of range", a.machine)));
        } else if a.job >= instance.len() {
            result = Err(violation(format!("unknown job {}", a.job)));
        } else if seen_machine[a.machine] {
            result = Err(violation(format!("machine {} assigned twice", a.machine)));
        } else if seen_job[a.job] {
            result = Err(violation(format!("job {} assigned twice", a.job)));
        } else if instance.jobs[a.job].release > t {
            result = Err(violation(format!("job {} is not yet released", a.job)));
        } else if physical[a.job] <= 0 {
            result = Err(violation(format!("job {} has no work left", a.job)));
        } else {
            seen_machine[a.machine] = true;
            seen_job[a.job] = true;
            continue;
        }
        break;
    }
    for a in run {
        if a.machine < seen_machine.len() {
            seen_machine[a.machine] = false;
        }
        if a.job < seen_job.len() {
            seen_job[a.job] = false;
        }
    }
    result
}

fn finish(
    header: TraceHeader,
    mut intervals: Vec<RunInterval>,
    mut completions: Vec<Completion>,
    events: Vec<PolicyEvent>,
) -> Trace {
    intervals.sort_by_key(|iv| (iv.start, iv.machine));
    completions.sort_by_key(|c| (c.time, c.job));
    Trace {
        header,
        intervals,
        completions,
        events,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn next_event_examples() {
        assert_eq!(next_event_time(5, Some(7), [3], None), Some(7));
        assert_eq!(next_event_time(5, None, [3], None), Some(8));
        assert_eq!(next_event_time(0, Some(10), [], None), Some(10));
        assert_eq!(next_event_time(0, None, [], None), None);
        assert_eq!(next_event_time(2, Some(9), [4], Some(3)), Some(3));
    }

    /// Runs whatever job ids are in `plan` on machine 0..k regardless of state.
    struct Scripted {
        plan: Vec<Assignment>,
    }

    impl Policy for Scripted {
        fn info(&self) -> PolicyInfo {
            PolicyInfo {
                name: "scripted".into(),
                groups: vec![],
                stack: None,
            }
        }
        fn machines(&self) -> usize {
            1
        }
        fn on_release(&mut self, _job: &Job, _t: Time) {}
        fn on_boundary(&mut self, _t: Time, _log: &mut Vec<PolicyEvent>) {}
        fn run_set(&self, _t: Time, physical: &[Time]) -> Vec<Assignment> {
            self.plan.iter().copied().filter(|a| physical[a.job] > 0).collect()
        }
        fn next_event(&self, _t: Time) -> Option<Time> {
            None
        }
        fn advance(&mut self, _from: Time, _to: Time) {}
        fn stats(&self) -> Vec<PolicyStats> {
            vec![]
        }
    }

    #[test]
    fn rejects_oversized_run_set() {
        let inst = Instance::from_original(&[(0, 2, 4), (0, 2, 4)], 1, "").unwrap();
        let mut p = Scripted {
            plan: vec![Assignment { machine: 0, job: 0 }, Assignment { machine: 1, job: 1 }],
        };
        let err = simulate(&inst, &mut p, &SimConfig::default()).unwrap_err();
        assert!(matches!(err, Error::PolicyViolation { .. }), "{err}");
    }

    #[test]
    fn rejects_unreleased_job() {
        let inst = Instance::from_original(&[(0, 2, 4), (3, 1, 5)], 1, "").unwrap();
        let mut p = Scripted {
            plan: vec![Assignment { machine: 0, job: 1 }],
        };
        let err = simulate(&inst, &mut p, &SimConfig::default()).unwrap_err();
        assert!(err.to_string().contains("not yet released"), "{err}");
    }

    #[test]
    fn empty_instance_gives_empty_trace() {
        let inst = Instance::new(vec![], 1, "").unwrap();
        let mut p = Scripted { plan: vec![] };
        let trace = simulate(&inst, &mut p, &SimConfig::default()).unwrap();
        assert!(trace.intervals.is_empty() && trace.completions.is_empty() && trace.events.is_empty());
    }

    #[test]
    fn scripted_job_runs_to_completion() {
        let inst = Instance::from_original(&[(1, 2, 4)], 1, "").unwrap();
        let mut p = Scripted {
            plan: vec![Assignment { machine: 0, job: 0 }],
        };
        let trace = simulate(&inst, &mut p, &SimConfig::default()).unwrap();
        assert_eq!(
            trace.intervals,
            vec![RunInterval { machine: 0, job: 0, start: 2, end: 6 }]
        );
        assert_eq!(trace.completions, vec![Completion { job: 0, time: 6 }]);
    }
}
