//! Three-way composition: a high-laxity scheduler on the first third of the
//! machines, SRPT on the second and the stack scheduler on the third. The
//! last two share the low-laxity jobs. When both want the same job, the copy
//! with less remaining work runs it physically (SRPT on ties) and the other
//! copy only simulates the run.

use log::warn;

use crate::engine::{simulate, Assignment, Policy, PolicyInfo, PolicyStats, SimConfig};
use crate::error::{Error, Result};
use crate::job::{Instance, Job, JobId, Time};
use crate::policy::highlax::high_laxity_policy;
use crate::policy::{Mlax, MlaxConfig, Srpt};
use crate::trace::{MachineGroup, PolicyEvent, Trace};

pub const NAME: &str = "final";

/// Smallest machine count with a nonzero group size.
pub const MIN_MACHINES: usize = 3;

/// Machine count from which the composition's guarantee is stated.
pub const GUARANTEE_MACHINES: usize = 48;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalConfig {
    pub stack: MlaxConfig,
    pub high_laxity: String,
}

impl Default for FinalConfig {
    fn default() -> Self {
        FinalConfig {
            stack: MlaxConfig::default(),
            high_laxity: crate::policy::highlax::EDF.into(),
        }
    }
}

/// Which copy physically runs a job both low-laxity schedulers selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Runner {
    Srpt,
    Mlax,
}

/// The physical runner for a job selected by both copies.
pub fn arbitrate(srpt_remaining: Time, mlax_remaining: Time) -> Runner {
    if mlax_remaining < srpt_remaining {
        Runner::Mlax
    } else {
        Runner::Srpt
    }
}

/// Merges the two low-laxity run sets into physical assignments. Each entry
/// of `srpt_run` / `mlax_run` is `(machine, job, that copy's remaining work)`.
pub fn arbitrate_shared(
    srpt_run: &[(usize, JobId, Time)],
    mlax_run: &[(usize, JobId, Time)],
) -> Vec<Assignment> {
    let mut out = Vec::with_capacity(srpt_run.len() + mlax_run.len());
    for &(machine, job, rs) in srpt_run {
        let shared = mlax_run.iter().find(|&&(_, j, _)| j == job);
        match shared {
            Some(&(_, _, rm)) if arbitrate(rs, rm) == Runner::Mlax => {}
            _ => out.push(Assignment { machine, job }),
        }
    }
    for &(machine, job, rm) in mlax_run {
        let shared = srpt_run.iter().find(|&&(_, j, _)| j == job);
        match shared {
            Some(&(_, _, rs)) if arbitrate(rs, rm) == Runner::Srpt => {}
            _ => out.push(Assignment { machine, job }),
        }
    }
    out
}

/// `(machine, job, remaining work in that copy)`.
type Selected = (usize, JobId, Time);

pub struct FinalAlg {
    group: usize,
    high: Box<dyn Policy + Send>,
    srpt: Srpt,
    mlax: Mlax,
    low: Vec<bool>,
    high_name: String,
}

impl FinalAlg {
    pub fn new(machines: usize, cfg: &FinalConfig) -> Result<Self> {
        if machines < MIN_MACHINES {
            return Err(Error::Config(format!(
                "the composition needs at least {MIN_MACHINES} machines, got {machines}"
            )));
        }
        let group = machines / 3;
        Ok(FinalAlg {
            group,
            high: high_laxity_policy(&cfg.high_laxity, group, 0)?,
            srpt: Srpt::with_offset(group, group).logging_completions(),
            mlax: Mlax::with_offset(group, 2 * group, cfg.stack)?,
            low: Vec::new(),
            high_name: cfg.high_laxity.clone(),
        })
    }

    pub fn group_size(&self) -> usize {
        self.group
    }

    fn is_low(&self, job: JobId) -> bool {
        self.low.get(job).copied().unwrap_or(false)
    }

    fn low_run_sets(&self) -> (Vec<Selected>, Vec<Selected>) {
        let srpt = self
            .srpt
            .running()
            .map(|(slot, j)| (self.group + slot, j, self.srpt.remaining(j).unwrap_or(0)))
            .collect();
        let mlax = self
            .mlax
            .state()
            .run_set()
            .into_iter()
            .map(|(i, j)| (2 * self.group + i, j, self.mlax.remaining(j).unwrap_or(0)))
            .collect();
        (srpt, mlax)
    }
}

impl Policy for FinalAlg {
    fn info(&self) -> PolicyInfo {
        let mut groups = self.high.info().groups;
        groups.extend(self.srpt.info().groups);
        groups.extend(self.mlax.info().groups);
        PolicyInfo {
            name: NAME.into(),
            groups,
            stack: Some(self.mlax.config().params()),
        }
    }

    fn machines(&self) -> usize {
        3 * self.group
    }

    fn on_release(&mut self, job: &Job, t: Time) {
        if self.low.len() <= job.id {
            self.low.resize(job.id + 1, false);
        }
        if job.is_high_laxity() {
            self.high.on_release(job, t);
        } else {
            self.low[job.id] = true;
            self.srpt.on_release(job, t);
            self.mlax.on_release(job, t);
        }
    }

    fn on_completion(&mut self, job: JobId, machine: usize, t: Time) {
        if !self.is_low(job) {
            self.high.on_completion(job, machine, t);
        }
    }

    fn on_boundary(&mut self, t: Time, log: &mut Vec<PolicyEvent>) {
        self.high.on_boundary(t, log);
        self.srpt.on_boundary(t, log);
        self.mlax.on_boundary(t, log);
    }

    fn run_set(&self, t: Time, physical: &[Time]) -> Vec<Assignment> {
        let mut out = self.high.run_set(t, physical);
        let (srpt, mlax) = self.low_run_sets();
        out.extend(
            arbitrate_shared(&srpt, &mlax)
                .into_iter()
                .filter(|a| physical.get(a.job).is_none_or(|&p| p > 0)),
        );
        out
    }

    fn next_event(&self, t: Time) -> Option<Time> {
        [
            self.high.next_event(t),
            self.srpt.next_event(t),
            self.mlax.next_event(t),
        ]
        .into_iter()
        .flatten()
        .min()
    }

    fn advance(&mut self, from: Time, to: Time) {
        self.high.advance(from, to);
        self.srpt.advance(from, to);
        self.mlax.advance(from, to);
    }

    fn stats(&self) -> Vec<PolicyStats> {
        let mut out = self.high.stats();
        out.extend(self.srpt.stats());
        out.extend(self.mlax.stats());
        out
    }

    fn check_invariants(&self, t: Time, physical: &[Time]) -> std::result::Result<(), String> {
        self.high.check_invariants(t, physical)?;
        self.srpt.check_invariants(t, physical)?;
        self.mlax.check_invariants(t, physical)?;
        for (job, &low) in self.low.iter().enumerate() {
            if !low {
                continue;
            }
            let p = physical[job];
            for (name, v) in [("srpt", self.srpt.remaining(job)), ("mlax", self.mlax.remaining(job))] {
                if let Some(v) = v {
                    if p > v {
                        return Err(format!(
                            "job {job}: physical remaining {p} exceeds {name} copy's {v}"
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for FinalAlg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FinalAlg")
            .field("group", &self.group)
            .field("high_laxity", &self.high_name)
            .finish_non_exhaustive()
    }
}

/// Outcome of a composed run.
#[derive(Debug, Clone)]
pub struct FinalRun {
    pub trace: Trace,
    /// One row per component, then a `final` row with the physical total.
    pub stats: Vec<PolicyStats>,
    /// Physical completions credited to each component's machine block.
    pub physical_by_group: Vec<(String, usize)>,
}

impl FinalRun {
    pub fn completions(&self) -> usize {
        self.trace.completions.len()
    }
}

/// Simulates the composition on `instance` using `machines` machines.
pub fn run_final(instance: &Instance, machines: usize, cfg: &FinalConfig, sim: &SimConfig) -> Result<FinalRun> {
    if machines < GUARANTEE_MACHINES {
        warn!("{machines} machines is below the m >= {GUARANTEE_MACHINES} regime of the composition");
    }
    let mut policy = FinalAlg::new(machines, cfg)?;
    let instance = if instance.machines == machines {
        std::borrow::Cow::Borrowed(instance)
    } else {
        std::borrow::Cow::Owned(instance.clone().with_machines(machines))
    };
    let trace = simulate(&instance, &mut policy, sim)?;
    let physical_by_group = physical_completions_by_group(&trace);
    let mut stats = policy.stats();
    stats.push(PolicyStats {
        policy: NAME.into(),
        virtual_completions: trace.completions.len(),
        ..Default::default()
    });
    Ok(FinalRun {
        trace,
        stats,
        physical_by_group,
    })
}

/// Credits each physical completion to the block that ran the job's last piece.
pub fn physical_completions_by_group(trace: &Trace) -> Vec<(String, usize)> {
    let mut counts: Vec<(String, usize)> = trace
        .header
        .groups
        .iter()
        .map(|g| (g.policy.clone(), 0))
        .collect();
    let mut last_machine: std::collections::HashMap<JobId, (Time, usize)> = Default::default();
    for iv in &trace.intervals {
        let e = last_machine.entry(iv.job).or_insert((iv.end, iv.machine));
        if iv.end >= e.0 {
            *e = (iv.end, iv.machine);
        }
    }
    for c in &trace.completions {
        if let Some(&(_, machine)) = last_machine.get(&c.job) {
            if let Some(k) = trace.header.groups.iter().position(|g: &MachineGroup| g.contains(machine)) {
                counts[k].1 += 1;
            }
        }
    }
    counts
}
