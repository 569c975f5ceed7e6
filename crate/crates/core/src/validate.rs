//! Post-hoc checks on traces. Everything here reads only the instance and
//! the trace; no live policy state is consulted.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::instance_hash;
use crate::job::{Frac, Instance, JobId, Time, INFINITE};
use crate::trace::{EventKind, MachineGroup, PolicyEvent, RunInterval, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub time: Time,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountingCounters {
    pub pushes: usize,
    pub replaces: usize,
    pub completion_pops: usize,
    pub infeasible_pops: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub completions: usize,
    pub stack: Option<AccountingCounters>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            ok: violations.is_empty(),
            violations,
            ..Default::default()
        }
    }

    fn push(&mut self, rule: &str, time: Time, detail: String) {
        self.violations.push(Violation {
            rule: rule.into(),
            time,
            detail,
        });
        self.ok = false;
    }

    /// Folds another report's violations into this one.
    pub fn merge(&mut self, other: ValidationReport) {
        self.ok &= other.ok;
        self.violations.extend(other.violations);
        if other.stack.is_some() {
            self.stack = other.stack;
        }
    }
}

/// Physical schedule validity on `machines` machines.
pub fn validate_trace(instance: &Instance, trace: &Trace, machines: usize) -> ValidationReport {
    let mut report = ValidationReport::from_violations(Vec::new());
    report.completions = trace.completions.len();
    let n = instance.len();

    if trace.header.instance_hash != instance_hash(instance) {
        report.push(
            "instance-hash",
            0,
            format!("trace was produced for instance {}", trace.header.instance_hash),
        );
    }

    let mut per_machine: Vec<Vec<RunInterval>> = vec![Vec::new(); machines];
    let mut per_job: Vec<Vec<RunInterval>> = vec![Vec::new(); n];
    for iv in &trace.intervals {
        if iv.end <= iv.start {
            report.push("empty-interval", iv.start, format!("{iv:?}"));
            continue;
        }
        if iv.machine >= machines {
            report.push("machine-range", iv.start, format!("machine {} of {machines}", iv.machine));
            continue;
        }
        if iv.job >= n {
            report.push("unknown-job", iv.start, format!("job {}", iv.job));
            continue;
        }
        let job = instance.job(iv.job);
        if iv.start < job.release {
            report.push(
                "before-release",
                iv.start,
                format!("job {} runs at {} before its release {}", iv.job, iv.start, job.release),
            );
        }
        per_machine[iv.machine].push(*iv);
        per_job[iv.job].push(*iv);
    }

    for (machine, ivs) in per_machine.iter_mut().enumerate() {
        ivs.sort_by_key(|iv| iv.start);
        for w in ivs.windows(2) {
            if w[1].start < w[0].end {
                report.push(
                    "machine-overlap",
                    w[1].start,
                    format!("machine {machine}: jobs {} and {} overlap", w[0].job, w[1].job),
                );
            }
        }
    }
    for (job, ivs) in per_job.iter_mut().enumerate() {
        ivs.sort_by_key(|iv| iv.start);
        for w in ivs.windows(2) {
            if w[1].start < w[0].end {
                report.push(
                    "job-overlap",
                    w[1].start,
                    format!("job {job} runs on machines {} and {} at once", w[0].machine, w[1].machine),
                );
            }
        }
    }

    // Busy-machine count by sweep.
    let mut edges: Vec<(Time, i64)> = trace
        .intervals
        .iter()
        .flat_map(|iv| [(iv.end, -1), (iv.start, 1)])
        .collect();
    edges.sort_unstable();
    let mut busy = 0i64;
    for (t, delta) in edges {
        busy += delta;
        if busy > machines as i64 {
            report.push("capacity", t, format!("{busy} machines busy of {machines}"));
            break;
        }
    }

    let work = trace.processing_per_job(n);
    let mut completed = vec![false; n];
    for c in &trace.completions {
        if c.job >= n {
            report.push("unknown-job", c.time, format!("completion of job {}", c.job));
            continue;
        }
        if std::mem::replace(&mut completed[c.job], true) {
            report.push("duplicate-completion", c.time, format!("job {}", c.job));
        }
        let job = instance.job(c.job);
        if work[c.job] != job.size {
            report.push(
                "completion-work",
                c.time,
                format!("job {} completed with {} of {} units", c.job, work[c.job], job.size),
            );
        }
        if c.time > job.deadline {
            report.push(
                "late-completion",
                c.time,
                format!("job {} completes at {} after deadline {}", c.job, c.time, job.deadline),
            );
        }
        let last_end = per_job[c.job].iter().map(|iv| iv.end).max();
        if last_end != Some(c.time) {
            report.push(
                "completion-time",
                c.time,
                format!("job {} last runs until {last_end:?}", c.job),
            );
        }
    }
    for (job, &w) in work.iter().enumerate() {
        if w > instance.job(job).size {
            report.push("over-processing", 0, format!("job {job} received {w} units"));
        }
        if !completed[job] && w == instance.job(job).size {
            report.push("missing-completion", 0, format!("job {job} received all its work"));
        }
    }
    report
}

/// Whether the first-run/last-run spans of the jobs on `machine` form a
/// laminar family: a job that started earlier never runs strictly inside a
/// later-starting job's span.
pub fn is_forest_schedule(trace: &Trace, machine: usize) -> bool {
    let ivs = trace.machine_intervals(machine);
    let mut spans: HashMap<JobId, (Time, Time)> = HashMap::new();
    for iv in &ivs {
        let e = spans.entry(iv.job).or_insert((iv.start, iv.end));
        e.0 = e.0.min(iv.start);
        e.1 = e.1.max(iv.end);
    }
    for (&j, &(fj, _)) in &spans {
        for (&k, &(fk, ck)) in &spans {
            if j == k || fj >= fk {
                continue;
            }
            let intrudes = ivs
                .iter()
                .any(|iv| iv.job == j && iv.start < ck && iv.end > fk);
            if intrudes {
                return false;
            }
        }
    }
    true
}

/// The machine block the stack scheduler ran on.
fn stack_group(trace: &Trace) -> Option<&MachineGroup> {
    trace
        .header
        .groups
        .iter()
        .find(|g| g.policy == "mlax" || g.policy == "lax_variant")
}

fn is_stack_event(kind: EventKind) -> bool {
    matches!(
        kind,
        EventKind::Push | EventKind::Replace | EventKind::CompletionPop | EventKind::InfeasiblePop
    )
}

/// Replays stack events and checks that every stack ends empty with
/// `pushes = completion pops + infeasible pops`.
pub fn stack_accounting(trace: &Trace) -> Result<AccountingCounters> {
    let Some(group) = stack_group(trace) else {
        return Ok(AccountingCounters::default());
    };
    let mut stacks: Vec<Vec<JobId>> = vec![Vec::new(); group.machines];
    let mut counters = AccountingCounters::default();
    for e in trace.events.iter().filter(|e| is_stack_event(e.kind)) {
        let machine = e.machine.ok_or_else(|| Error::Accounting {
            machine: usize::MAX,
            reason: format!("{} event for job {} has no machine", e.kind.as_str(), e.job),
        })?;
        if !group.contains(machine) {
            return Err(Error::Accounting {
                machine,
                reason: format!("machine outside the stack block at t={}", e.time),
            });
        }
        let stack = &mut stacks[machine - group.offset];
        match e.kind {
            EventKind::Push => {
                counters.pushes += 1;
                stack.push(e.job);
            }
            EventKind::Replace => {
                counters.replaces += 1;
                let evicted = e.extra.map(|x| x as JobId);
                if stack.last().copied() != evicted || evicted.is_none() {
                    return Err(Error::Accounting {
                        machine,
                        reason: format!("replace at t={} evicts {evicted:?} but top is {:?}", e.time, stack.last()),
                    });
                }
                *stack.last_mut().expect("checked") = e.job;
            }
            EventKind::CompletionPop | EventKind::InfeasiblePop => {
                if e.kind == EventKind::CompletionPop {
                    counters.completion_pops += 1;
                } else {
                    counters.infeasible_pops += 1;
                }
                if stack.pop() != Some(e.job) {
                    return Err(Error::Accounting {
                        machine,
                        reason: format!("pop of job {} at t={} is not the top", e.job, e.time),
                    });
                }
            }
            _ => unreachable!(),
        }
    }
    if let Some((i, s)) = stacks.iter().enumerate().find(|(_, s)| !s.is_empty()) {
        return Err(Error::Accounting {
            machine: group.offset + i,
            reason: format!("{} jobs left on the stack at the end", s.len()),
        });
    }
    if counters.pushes != counters.completion_pops + counters.infeasible_pops {
        return Err(Error::Accounting {
            machine: group.offset,
            reason: format!(
                "{} pushes but {} completion pops and {} infeasible pops",
                counters.pushes, counters.completion_pops, counters.infeasible_pops
            ),
        });
    }
    Ok(counters)
}

/// Replays the stack scheduler's decisions and re-checks, at every
/// pseudo-release, the viability quorum, the window, and the preconditions of
/// the chosen push or replacement (or that neither applied).
pub fn check_stack_rules(instance: &Instance, trace: &Trace) -> ValidationReport {
    let mut report = ValidationReport::from_violations(Vec::new());
    let (Some(group), Some(params)) = (stack_group(trace), trace.header.stack.as_ref()) else {
        return report;
    };
    let variant_mlax = params.variant == "mlax";
    let alpha = i128::from(params.alpha);
    let m = group.machines;
    let n = instance.len();
    let size = |j: Option<JobId>| j.map_or(INFINITE, |j| instance.job(j).size);
    let laxity = |j: Option<JobId>| j.map_or(INFINITE, |j| instance.job(j).laxity());
    let quorum = |f: &Frac| f.ceil_of(m);

    // This copy's processing per job, rebuilt from tops over time.
    let mut stacks: Vec<Vec<JobId>> = vec![Vec::new(); m];
    let events: &[PolicyEvent] = &trace.events;
    let mut progress: Vec<Time> = vec![0; n];
    let mut last_t = events.first().map_or(0, |e| e.time);

    let mut idx = 0;
    while idx < events.len() {
        let e = events[idx];
        if e.time > last_t {
            // Tops ran on their machines since the previous event time.
            for s in &stacks {
                if let Some(&top) = s.last() {
                    progress[top] += e.time - last_t;
                }
            }
            last_t = e.time;
        }
        let local = |machine: Option<usize>| machine.and_then(|x| x.checked_sub(group.offset)).filter(|&x| x < m);
        match e.kind {
            EventKind::PseudoRelease => {
                let job = instance.job(e.job);
                let t = e.time;
                if t < job.release || t > job.viability_window_end() {
                    report.push(
                        "window",
                        t,
                        format!("job {} pseudo-released outside [{}, {}]", e.job, job.release, job.viability_window_end()),
                    );
                }
                let large = (0..m)
                    .filter(|&i| alpha * i128::from(size(stacks[i].last().copied())) >= i128::from(job.laxity()))
                    .count();
                if large < quorum(&params.viability_fraction) {
                    report.push(
                        "viability",
                        t,
                        format!("job {}: {large} large frontier jobs, need {}", e.job, quorum(&params.viability_fraction)),
                    );
                }
                let need = alpha * i128::from(job.size);
                let push_ok: Vec<usize> = (0..m)
                    .filter(|&i| i128::from(laxity(stacks[i].last().copied())) >= need)
                    .collect();
                let half_left = !params.strict_half_laxity
                    || 2 * (job.deadline - t - (job.size - progress[e.job])) >= job.laxity();
                let push_allowed = !push_ok.is_empty() && (variant_mlax || half_left);
                let roomy: Vec<usize> = (0..m)
                    .filter(|&i| {
                        let s = &stacks[i];
                        !s.is_empty() && i128::from(laxity(s.len().checked_sub(2).map(|k| s[k]))) >= need
                    })
                    .collect();
                let quorum_ok = !variant_mlax || roomy.len() >= quorum(&params.replace_fraction);
                let replace_best = roomy
                    .iter()
                    .copied()
                    .filter(|&i| job.laxity() > laxity(stacks[i].last().copied()))
                    .min_by_key(|&i| (laxity(stacks[i].last().copied()), i));

                let follow = events
                    .get(idx + 1)
                    .filter(|f| f.job == e.job && f.time == t && matches!(f.kind, EventKind::Push | EventKind::Replace));
                match follow {
                    Some(f) if f.kind == EventKind::Push => {
                        let Some(i) = local(f.machine) else {
                            report.push("push-machine", t, format!("job {} pushed off-block", e.job));
                            idx += 2;
                            continue;
                        };
                        if !push_allowed || push_ok.first() != Some(&i) {
                            report.push(
                                "push-rule",
                                t,
                                format!("job {} pushed on stack {i}; eligible stacks {push_ok:?}", e.job),
                            );
                        }
                        stacks[i].push(e.job);
                        idx += 2;
                        continue;
                    }
                    Some(f) => {
                        let Some(i) = local(f.machine) else {
                            report.push("replace-machine", t, format!("job {} replaced off-block", e.job));
                            idx += 2;
                            continue;
                        };
                        if push_allowed {
                            report.push("replace-rule", t, format!("job {} replaced although a push applied", e.job));
                        }
                        if !quorum_ok {
                            report.push(
                                "replace-quorum",
                                t,
                                format!("job {}: {} roomy stacks, need {}", e.job, roomy.len(), quorum(&params.replace_fraction)),
                            );
                        }
                        if replace_best != Some(i) {
                            report.push(
                                "replace-choice",
                                t,
                                format!("job {} replaced on stack {i}, expected {replace_best:?}", e.job),
                            );
                        }
                        if stacks[i].last().map(|&j| j as i64) != f.extra {
                            report.push("replace-evicted", t, format!("evicted {:?} is not the top", f.extra));
                        }
                        if let Some(top) = stacks[i].last_mut() {
                            *top = e.job;
                        }
                        idx += 2;
                        continue;
                    }
                    None => {
                        if push_allowed || (quorum_ok && replace_best.is_some()) {
                            report.push(
                                "noop-rule",
                                t,
                                format!("job {} was neither pushed nor placed although a rule applied", e.job),
                            );
                        }
                    }
                }
            }
            EventKind::Push => {
                report.push("orphan-push", e.time, format!("push of job {} without pseudo-release", e.job));
                if let Some(i) = local(e.machine) {
                    stacks[i].push(e.job);
                }
            }
            EventKind::Replace => {
                report.push("orphan-replace", e.time, format!("replace by job {} without pseudo-release", e.job));
                if let Some(i) = local(e.machine) {
                    if let Some(top) = stacks[i].last_mut() {
                        *top = e.job;
                    }
                }
            }
            EventKind::CompletionPop | EventKind::InfeasiblePop => {
                if let Some(i) = local(e.machine) {
                    if stacks[i].last() != Some(&e.job) {
                        report.push("pop-order", e.time, format!("job {} popped but not on top", e.job));
                    } else {
                        stacks[i].pop();
                    }
                    let job = instance.job(e.job);
                    let left = job.size - progress[e.job];
                    if e.kind == EventKind::CompletionPop && left != 0 {
                        report.push("completion-pop", e.time, format!("job {} popped with {left} left", e.job));
                    }
                    if e.kind == EventKind::InfeasiblePop && left > 0 && e.time + left <= job.deadline {
                        report.push("infeasible-pop", e.time, format!("job {} was still feasible", e.job));
                    }
                }
            }
            _ => {}
        }
        idx += 1;
    }
    report
}

/// Admitted high-laxity jobs all complete by their deadlines.
pub fn check_admissions(instance: &Instance, trace: &Trace) -> ValidationReport {
    let mut report = ValidationReport::from_violations(Vec::new());
    let done: HashMap<JobId, Time> = trace.completions.iter().map(|c| (c.job, c.time)).collect();
    for e in trace.events.iter().filter(|e| e.kind == EventKind::Admit) {
        match done.get(&e.job) {
            Some(&t) if t <= instance.job(e.job).deadline => {}
            other => report.push(
                "admission",
                e.time,
                format!("admitted job {} finished at {other:?}", e.job),
            ),
        }
    }
    report
}

/// Every check that applies to the trace's policy.
pub fn validate_all(instance: &Instance, trace: &Trace) -> ValidationReport {
    let mut report = validate_trace(instance, trace, trace.header.machines);
    if trace.header.stack.is_some() {
        match stack_accounting(trace) {
            Ok(c) => report.stack = Some(c),
            Err(e) => report.push("stack-accounting", 0, e.to_string()),
        }
        report.merge(check_stack_rules(instance, trace));
    }
    report.merge(check_admissions(instance, trace));
    report
}
