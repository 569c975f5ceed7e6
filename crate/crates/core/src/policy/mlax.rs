//! The stack scheduler for low-laxity jobs.
//!
//! Machine `i` always runs the top of stack `i`. A released job waits until
//! its pseudo-release time, the first instant in `[r, r + laxity/2]` at which
//! enough frontier jobs are large relative to its laxity. At that instant it
//! is pushed onto a stack whose top has room for it (rule a), or replaces the
//! smallest-laxity top among stacks whose second job has room (rule b).
//! When a top completes it is popped, followed by every top that can no
//! longer finish (rules c and d). Each stack has an implicit sentinel of
//! infinite size and laxity at the bottom.

use std::collections::BTreeSet;

use crate::engine::{Assignment, Policy, PolicyInfo, PolicyStats};
use crate::error::{Error, Result};
use crate::job::{is_feasible, Frac, Job, JobId, Time, INFINITE};
use crate::trace::{EventKind, MachineGroup, PolicyEvent, StackParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Viability quorum 7/8, replacement quorum 3/4.
    Mlax,
    /// Viability quorum 1/2, strict feasibility on push, per-stack replacement.
    LaxVariant,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Mlax => "mlax",
            Variant::LaxVariant => "lax_variant",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mlax" => Ok(Variant::Mlax),
            "lax_variant" => Ok(Variant::LaxVariant),
            other => Err(Error::Config(format!("unknown stack variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlaxConfig {
    pub alpha: i64,
    pub viability_fraction: Frac,
    pub replace_fraction: Frac,
    pub variant: Variant,
    /// Lax variant only: pushes need half the original laxity left.
    pub strict_half_laxity: bool,
}

impl Default for MlaxConfig {
    fn default() -> Self {
        MlaxConfig::mlax(24)
    }
}

impl MlaxConfig {
    pub fn mlax(alpha: i64) -> Self {
        MlaxConfig {
            alpha,
            viability_fraction: Frac::new(7, 8),
            replace_fraction: Frac::new(3, 4),
            variant: Variant::Mlax,
            strict_half_laxity: false,
        }
    }

    pub fn lax_variant(alpha: i64) -> Self {
        MlaxConfig {
            alpha,
            viability_fraction: Frac::new(1, 2),
            replace_fraction: Frac::new(1, 2),
            variant: Variant::LaxVariant,
            strict_half_laxity: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha < 1 {
            return Err(Error::Config(format!("alpha must be >= 1, got {}", self.alpha)));
        }
        let fracs_ok = self.replace_fraction.num > 0
            && self.replace_fraction.le(&self.viability_fraction)
            && self.viability_fraction.le(&Frac::new(1, 1));
        if !fracs_ok {
            return Err(Error::Config(format!(
                "need 0 < replace ({}) <= viability ({}) <= 1",
                self.replace_fraction, self.viability_fraction
            )));
        }
        Ok(())
    }

    pub fn params(&self) -> StackParams {
        StackParams {
            variant: self.variant.name().into(),
            alpha: self.alpha,
            viability_fraction: self.viability_fraction,
            replace_fraction: self.replace_fraction,
            strict_half_laxity: self.strict_half_laxity,
        }
    }

    fn scaled(&self, size: Time) -> i128 {
        i128::from(self.alpha) * i128::from(size)
    }
}

/// What happened at a pseudo-release.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Pushed(usize),
    Replaced { stack: usize, evicted: JobId },
    NoOp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopKind {
    Completion,
    Infeasible,
}

#[derive(Debug, Clone, Copy)]
struct Meta {
    size: Time,
    laxity: Time,
    deadline: Time,
    remaining: Time,
}

/// The `m` stacks plus this scheduler's view of each job.
#[derive(Debug, Clone)]
pub struct StackState {
    stacks: Vec<Vec<JobId>>,
    meta: Vec<Option<Meta>>,
}

impl StackState {
    pub fn new(machines: usize) -> Self {
        StackState {
            stacks: vec![Vec::new(); machines],
            meta: Vec::new(),
        }
    }

    pub fn machines(&self) -> usize {
        self.stacks.len()
    }

    pub fn track(&mut self, job: &Job) {
        if self.meta.len() <= job.id {
            self.meta.resize(job.id + 1, None);
        }
        self.meta[job.id] = Some(Meta {
            size: job.size,
            laxity: job.laxity(),
            deadline: job.deadline,
            remaining: job.size,
        });
    }

    fn meta(&self, job: JobId) -> &Meta {
        self.meta[job].as_ref().expect("untracked job")
    }

    pub fn remaining(&self, job: JobId) -> Option<Time> {
        self.meta.get(job).and_then(|m| m.as_ref()).map(|m| m.remaining)
    }

    /// Sets this scheduler's remaining work for a tracked job.
    pub fn set_remaining(&mut self, job: JobId, remaining: Time) {
        if let Some(Some(m)) = self.meta.get_mut(job) {
            m.remaining = remaining;
        }
    }

    pub fn stack(&self, i: usize) -> &[JobId] {
        &self.stacks[i]
    }

    pub fn top(&self, i: usize) -> Option<JobId> {
        self.stacks[i].last().copied()
    }

    pub fn second(&self, i: usize) -> Option<JobId> {
        let s = &self.stacks[i];
        s.len().checked_sub(2).map(|k| s[k])
    }

    /// Size of the top of stack `i`; the sentinel counts as infinite.
    pub fn top_size(&self, i: usize) -> Time {
        self.top(i).map_or(INFINITE, |j| self.meta(j).size)
    }

    pub fn top_laxity(&self, i: usize) -> Time {
        self.top(i).map_or(INFINITE, |j| self.meta(j).laxity)
    }

    pub fn second_laxity(&self, i: usize) -> Time {
        self.second(i).map_or(INFINITE, |j| self.meta(j).laxity)
    }

    pub fn push(&mut self, i: usize, job: JobId) {
        self.stacks[i].push(job);
    }

    fn is_top_feasible(&self, i: usize, t: Time) -> bool {
        match self.top(i) {
            None => true,
            Some(j) => {
                let m = self.meta(j);
                is_feasible(m.remaining, m.deadline, t)
            }
        }
    }

    /// Frontier jobs `j'` with `alpha * x_j' >= laxity`, sentinels included.
    pub fn count_large_frontier(&self, laxity: Time, cfg: &MlaxConfig) -> usize {
        (0..self.machines())
            .filter(|&i| match self.top(i) {
                None => true,
                Some(j) => cfg.scaled(self.meta(j).size) >= i128::from(laxity),
            })
            .count()
    }

    /// Whether a job with `laxity` meets the viability quorum right now.
    pub fn check_viability(&self, laxity: Time, cfg: &MlaxConfig) -> bool {
        self.count_large_frontier(laxity, cfg) >= cfg.viability_fraction.ceil_of(self.machines())
    }

    /// Largest laxity that is currently viable (`i128::MAX` when unbounded).
    pub fn viability_threshold(&self, cfg: &MlaxConfig) -> i128 {
        let k = cfg.viability_fraction.ceil_of(self.machines());
        if k == 0 {
            return i128::MAX;
        }
        let mut sizes: Vec<Time> = (0..self.machines()).map(|i| self.top_size(i)).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let kth = sizes[k - 1];
        if kth == INFINITE {
            i128::MAX
        } else {
            cfg.scaled(kth)
        }
    }

    /// Rule (a) target: lowest stack whose top has laxity of at least `alpha * x_j`.
    pub fn push_target(&self, size: Time, cfg: &MlaxConfig) -> Option<usize> {
        let need = cfg.scaled(size);
        (0..self.machines()).find(|&i| i128::from(self.top_laxity(i)) >= need)
    }

    /// Remaining laxity `d - t - remaining` must keep half of the original.
    pub fn is_strictly_feasible(&self, job: &Job, t: Time, cfg: &MlaxConfig) -> bool {
        let remaining = self.remaining(job.id).unwrap_or(job.size);
        let half_left = !cfg.strict_half_laxity || 2 * (job.deadline - t - remaining) >= job.laxity();
        half_left && self.push_target(job.size, cfg).is_some()
    }

    /// Rule (b) target, or `None`.
    pub fn replace_target(&self, job: &Job, cfg: &MlaxConfig) -> Option<usize> {
        let need = cfg.scaled(job.size);
        let laxity = job.laxity();
        let roomy: Vec<usize> = (0..self.machines())
            .filter(|&i| self.top(i).is_some() && i128::from(self.second_laxity(i)) >= need)
            .collect();
        if cfg.variant == Variant::Mlax && roomy.len() < cfg.replace_fraction.ceil_of(self.machines()) {
            return None;
        }
        roomy
            .into_iter()
            .filter(|&i| laxity > self.top_laxity(i))
            .min_by_key(|&i| (self.top_laxity(i), i))
    }

    /// Applies rules (a)/(b) for `job` at its pseudo-release time.
    pub fn on_pseudo_release(&mut self, job: &Job, t: Time, cfg: &MlaxConfig) -> Action {
        let pushable = match cfg.variant {
            Variant::Mlax => self.push_target(job.size, cfg),
            Variant::LaxVariant => {
                if self.is_strictly_feasible(job, t, cfg) {
                    self.push_target(job.size, cfg)
                } else {
                    None
                }
            }
        };
        if let Some(i) = pushable {
            self.push(i, job.id);
            return Action::Pushed(i);
        }
        if let Some(i) = self.replace_target(job, cfg) {
            let evicted = self.stacks[i].pop().expect("replace needs a top");
            self.stacks[i].push(job.id);
            return Action::Replaced { stack: i, evicted };
        }
        Action::NoOp
    }

    /// Rules (c)/(d): pop the completed top of stack `i`, then every
    /// infeasible top beneath it.
    pub fn on_completion_pop(&mut self, i: usize, t: Time) -> Vec<(JobId, PopKind)> {
        let mut popped = Vec::new();
        if let Some(j) = self.stacks[i].pop() {
            popped.push((j, PopKind::Completion));
        }
        while !self.is_top_feasible(i, t) {
            let j = self.stacks[i].pop().expect("sentinel is always feasible");
            popped.push((j, PopKind::Infeasible));
        }
        popped
    }

    /// Non-sentinel tops, as `(stack, job)`.
    pub fn run_set(&self) -> Vec<(usize, JobId)> {
        (0..self.machines())
            .filter_map(|i| self.top(i).map(|j| (i, j)))
            .collect()
    }

    fn top_completed(&self, i: usize) -> bool {
        self.top(i).is_some_and(|j| self.meta(j).remaining == 0)
    }
}

/// Free-standing strict-feasibility gate of the Lax variant.
pub fn lax_variant_gate(job: &Job, state: &StackState, t: Time, cfg: &MlaxConfig) -> bool {
    state.is_strictly_feasible(job, t, cfg)
}

/// The stack scheduler as a [`Policy`].
#[derive(Debug, Clone)]
pub struct Mlax {
    cfg: MlaxConfig,
    offset: usize,
    state: StackState,
    jobs: Vec<Option<Job>>,
    pending_by_laxity: BTreeSet<(Time, JobId)>,
    pending_by_end: BTreeSet<(Time, JobId)>,
    threshold: Option<i128>,
    stats: PolicyStats,
}

impl Mlax {
    pub fn new(machines: usize, cfg: MlaxConfig) -> Result<Self> {
        Mlax::with_offset(machines, 0, cfg)
    }

    pub fn with_offset(machines: usize, offset: usize, cfg: MlaxConfig) -> Result<Self> {
        cfg.validate()?;
        if machines == 0 {
            return Err(Error::Config("stack scheduler needs at least one machine".into()));
        }
        Ok(Mlax {
            cfg,
            offset,
            state: StackState::new(machines),
            jobs: Vec::new(),
            pending_by_laxity: BTreeSet::new(),
            pending_by_end: BTreeSet::new(),
            threshold: None,
            stats: PolicyStats {
                policy: cfg.variant.name().into(),
                ..Default::default()
            },
        })
    }

    pub fn config(&self) -> &MlaxConfig {
        &self.cfg
    }

    pub fn state(&self) -> &StackState {
        &self.state
    }

    pub fn remaining(&self, job: JobId) -> Option<Time> {
        self.state.remaining(job)
    }

    pub fn is_pending(&self, job: JobId) -> bool {
        self.jobs
            .get(job)
            .and_then(|j| j.as_ref())
            .is_some_and(|j| self.pending_by_laxity.contains(&(j.laxity(), j.id)))
    }

    fn threshold(&mut self) -> i128 {
        match self.threshold {
            Some(v) => v,
            None => {
                let v = self.state.viability_threshold(&self.cfg);
                self.threshold = Some(v);
                v
            }
        }
    }

    fn frontier_changed(&mut self) {
        self.threshold = None;
    }

    fn drop_pending(&mut self, job: &Job) {
        self.pending_by_laxity.remove(&(job.laxity(), job.id));
        self.pending_by_end.remove(&(job.viability_window_end(), job.id));
    }

    fn resolve_pseudo_releases(&mut self, t: Time, log: &mut Vec<PolicyEvent>) {
        // Pending jobs are ordered by laxity, so the viable ones form a prefix.
        while let Some(&(laxity, id)) = self.pending_by_laxity.first() {
            if i128::from(laxity) > self.threshold() {
                break;
            }
            let job = self.jobs[id].expect("pending job is tracked");
            debug_assert!(self.state.check_viability(laxity, &self.cfg));
            self.drop_pending(&job);
            log.push(PolicyEvent::new(t, EventKind::PseudoRelease, id));
            match self.state.on_pseudo_release(&job, t, &self.cfg) {
                Action::Pushed(i) => {
                    self.stats.pushes += 1;
                    log.push(PolicyEvent::new(t, EventKind::Push, id).on(self.offset + i));
                    self.frontier_changed();
                }
                Action::Replaced { stack, evicted } => {
                    self.stats.replaces += 1;
                    log.push(
                        PolicyEvent::new(t, EventKind::Replace, id)
                            .on(self.offset + stack)
                            .with_extra(evicted as i64),
                    );
                    self.frontier_changed();
                }
                Action::NoOp => {}
            }
        }
    }
}

impl Policy for Mlax {
    fn info(&self) -> PolicyInfo {
        let name = self.cfg.variant.name();
        PolicyInfo {
            name: name.into(),
            groups: vec![MachineGroup {
                policy: name.into(),
                offset: self.offset,
                machines: self.state.machines(),
            }],
            stack: Some(self.cfg.params()),
        }
    }

    fn machines(&self) -> usize {
        self.offset + self.state.machines()
    }

    fn on_release(&mut self, job: &Job, _t: Time) {
        if self.jobs.len() <= job.id {
            self.jobs.resize(job.id + 1, None);
        }
        self.jobs[job.id] = Some(*job);
        self.state.track(job);
        self.pending_by_laxity.insert((job.laxity(), job.id));
        self.pending_by_end.insert((job.viability_window_end(), job.id));
    }

    fn on_boundary(&mut self, t: Time, log: &mut Vec<PolicyEvent>) {
        for i in 0..self.state.machines() {
            if !self.state.top_completed(i) {
                continue;
            }
            for (job, kind) in self.state.on_completion_pop(i, t) {
                let machine = self.offset + i;
                match kind {
                    PopKind::Completion => {
                        self.stats.completion_pops += 1;
                        self.stats.virtual_completions += 1;
                        log.push(PolicyEvent::new(t, EventKind::CompletionPop, job).on(machine));
                    }
                    PopKind::Infeasible => {
                        self.stats.infeasible_pops += 1;
                        log.push(PolicyEvent::new(t, EventKind::InfeasiblePop, job).on(machine));
                    }
                }
            }
            self.frontier_changed();
        }

        self.resolve_pseudo_releases(t, log);

        while let Some(&(end, id)) = self.pending_by_end.first() {
            if end > t {
                break;
            }
            let job = self.jobs[id].expect("pending job is tracked");
            self.drop_pending(&job);
            log.push(PolicyEvent::new(t, EventKind::WindowExpiry, id));
        }
    }

    fn run_set(&self, _t: Time, physical: &[Time]) -> Vec<Assignment> {
        self.state
            .run_set()
            .into_iter()
            .filter(|&(_, job)| physical.get(job).is_none_or(|&p| p > 0))
            .map(|(i, job)| Assignment {
                machine: self.offset + i,
                job,
            })
            .collect()
    }

    fn next_event(&self, t: Time) -> Option<Time> {
        let completion = self
            .state
            .run_set()
            .into_iter()
            .filter_map(|(_, j)| self.state.remaining(j))
            .map(|r| t + r)
            .min();
        let expiry = self.pending_by_end.first().map(|&(end, _)| end);
        completion.into_iter().chain(expiry).min()
    }

    fn advance(&mut self, from: Time, to: Time) {
        let dt = to - from;
        for (_, job) in self.state.run_set() {
            if let Some(Some(m)) = self.state.meta.get_mut(job) {
                m.remaining -= dt;
                debug_assert!(m.remaining >= 0);
            }
        }
    }

    fn stats(&self) -> Vec<PolicyStats> {
        vec![self.stats.clone()]
    }

    fn check_invariants(&self, t: Time, _physical: &[Time]) -> std::result::Result<(), String> {
        for i in 0..self.state.machines() {
            if !self.state.is_top_feasible(i, t) {
                return Err(format!("top of stack {i} is infeasible at {t}"));
            }
        }
        for &(end, id) in &self.pending_by_end {
            let job = self.jobs[id].as_ref().expect("tracked");
            if t < job.release || t > end {
                return Err(format!("pending job {id} outside its window at {t}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A stack state with the given stacks; `jobs[k] = (size, laxity)` for id k.
    fn state(jobs: &[(Time, Time)], stacks: &[&[JobId]]) -> StackState {
        let mut s = StackState::new(stacks.len());
        for (id, &(x, l)) in jobs.iter().enumerate() {
            s.track(&Job::new(id, 0, x, x + l).unwrap());
        }
        for (i, st) in stacks.iter().enumerate() {
            for &j in *st {
                s.push(i, j);
            }
        }
        s
    }

    #[test]
    fn viability_with_empty_stacks() {
        let s = state(&[], &[&[] as &[usize]; 8]);
        let cfg = MlaxConfig::mlax(24);
        assert!(s.check_viability(1_000_000, &cfg));
        assert_eq!(s.viability_threshold(&cfg), i128::MAX);
    }

    #[test]
    fn viability_seven_of_eight() {
        let cfg = MlaxConfig::mlax(24);
        // One top with size 1: 24 * 1 >= 16.
        let s = state(&[(1, 0)], &[&[0], &[], &[], &[], &[], &[], &[], &[]]);
        assert_eq!(s.count_large_frontier(16, &cfg), 8);
        assert!(s.check_viability(16, &cfg));
        // Two tops too small for laxity 30: 6 < 7.
        let s = state(&[(1, 0), (1, 0)], &[&[0], &[1], &[], &[], &[], &[], &[], &[]]);
        assert_eq!(s.count_large_frontier(30, &cfg), 6);
        assert!(!s.check_viability(30, &cfg));
        assert_eq!(s.viability_threshold(&cfg), 24);
        assert!(s.check_viability(24, &cfg));
    }

    #[test]
    fn push_onto_empty_stack() {
        let cfg = MlaxConfig::mlax(24);
        let mut s = state(&[(100, 0)], &[&[0], &[]]);
        let j = Job::new(1, 0, 50, 60).unwrap();
        s.track(&j);
        assert_eq!(s.on_pseudo_release(&j, 0, &cfg), Action::Pushed(1));
        assert_eq!(s.top(1), Some(1));
    }

    #[test]
    fn push_prefers_lowest_index() {
        let cfg = MlaxConfig::mlax(2);
        let mut s = state(&[(10, 10), (10, 10)], &[&[0], &[1]]);
        let j = Job::new(2, 0, 5, 6).unwrap();
        s.track(&j);
        assert_eq!(s.on_pseudo_release(&j, 0, &cfg), Action::Pushed(0));
    }

    /// Eight stacks each holding one "base" job (large laxity) with a small
    /// top of the given laxity; the base jobs are the second-tops.
    fn replace_fixture(roomy: usize, top_laxities: &[Time]) -> StackState {
        let mut jobs = Vec::new();
        let mut stacks: Vec<Vec<JobId>> = Vec::new();
        for (i, &l) in top_laxities.iter().enumerate() {
            let base_laxity = if i < roomy { 1000 } else { 1 };
            jobs.push((100, base_laxity));
            jobs.push((100, l));
            stacks.push(vec![2 * i, 2 * i + 1]);
        }
        let refs: Vec<&[JobId]> = stacks.iter().map(|v| v.as_slice()).collect();
        state(&jobs, &refs)
    }

    #[test]
    fn replace_picks_minimum_top_laxity() {
        let cfg = MlaxConfig::mlax(24);
        let mut s = replace_fixture(6, &[9, 5, 9, 9, 9, 9, 2, 2]);
        // New job: size 10 so alpha * x = 240 <= 1000 on six roomy stacks,
        // laxity 7 beats the top with laxity 5; the laxity-2 tops are not roomy.
        let j = Job::new(100, 0, 10, 17).unwrap();
        s.track(&j);
        assert_eq!(s.push_target(10, &cfg), None);
        let evicted = s.top(1).unwrap();
        assert_eq!(
            s.on_pseudo_release(&j, 0, &cfg),
            Action::Replaced { stack: 1, evicted }
        );
        assert_eq!(s.top(1), Some(100));
        assert_eq!(s.stack(1).len(), 2);
    }

    #[test]
    fn replace_needs_three_quarter_quorum() {
        let cfg = MlaxConfig::mlax(24);
        let mut s = replace_fixture(5, &[9, 5, 9, 9, 9, 9, 2, 2]);
        let j = Job::new(100, 0, 10, 17).unwrap();
        s.track(&j);
        assert_eq!(s.on_pseudo_release(&j, 0, &cfg), Action::NoOp);
    }

    #[test]
    fn lax_variant_replaces_without_quorum() {
        let cfg = MlaxConfig::lax_variant(24);
        let mut s = replace_fixture(1, &[9, 5, 9, 9, 9, 9, 2, 2]);
        let j = Job::new(100, 0, 10, 17).unwrap();
        s.track(&j);
        // Only stack 0 is roomy and its top laxity 9 is not below 7.
        assert_eq!(s.on_pseudo_release(&j, 0, &cfg), Action::NoOp);
        let mut s = replace_fixture(2, &[9, 5, 9, 9, 9, 9, 2, 2]);
        s.track(&j);
        assert!(matches!(s.on_pseudo_release(&j, 0, &cfg), Action::Replaced { stack: 1, .. }));
    }

    #[test]
    fn completion_pop_examples() {
        // a feasible below completed b.
        let mut s = state(&[(4, 10), (1, 0)], &[&[0, 1]]);
        s.set_remaining(1, 0);
        assert_eq!(s.on_completion_pop(0, 0), vec![(1, PopKind::Completion)]);
        assert_eq!(s.top(0), Some(0));

        // a infeasible (deadline 14, remaining 4, t = 11).
        let mut s = state(&[(4, 10), (1, 0)], &[&[0, 1]]);
        s.set_remaining(1, 0);
        assert_eq!(
            s.on_completion_pop(0, 11),
            vec![(1, PopKind::Completion), (0, PopKind::Infeasible)]
        );
        assert_eq!(s.top(0), None);

        // c feasible shields infeasible a.
        let mut s = state(&[(4, 10), (1, 0), (2, 20)], &[&[0, 2, 1]]);
        s.set_remaining(1, 0);
        assert_eq!(s.on_completion_pop(0, 11), vec![(1, PopKind::Completion)]);
        assert_eq!(s.top(0), Some(2));
    }

    #[test]
    fn run_set_skips_sentinels() {
        let s = state(&[(1, 1), (1, 1)], &[&[0], &[], &[1]]);
        assert!(state(&[], &[&[], &[]]).run_set().is_empty());
        assert_eq!(s.run_set(), vec![(0, 0), (2, 1)]);
    }

    #[test]
    fn strict_feasibility_boundary() {
        let cfg = MlaxConfig::lax_variant(1);
        let s = state(&[], &[&[], &[]]);
        // laxity 10 at release 0; at t = 5 with no progress, 5 laxity remains.
        let j = Job::new(0, 0, 20, 30).unwrap();
        assert!(lax_variant_gate(&j, &s, 5, &cfg));
        assert!(!lax_variant_gate(&j, &s, 6, &cfg));
        let mut loose = cfg;
        loose.strict_half_laxity = false;
        assert!(lax_variant_gate(&j, &s, 6, &loose));
    }

    #[test]
    fn lax_variant_half_quorum() {
        let cfg = MlaxConfig::lax_variant(1);
        // Four large tops and four tiny tops on eight stacks.
        let jobs: Vec<(Time, Time)> = (0..8).map(|i| if i < 4 { (100, 0) } else { (1, 0) }).collect();
        let stacks: Vec<Vec<JobId>> = (0..8).map(|i| vec![i]).collect();
        let refs: Vec<&[JobId]> = stacks.iter().map(|v| v.as_slice()).collect();
        let s = state(&jobs, &refs);
        assert_eq!(s.count_large_frontier(50, &cfg), 4);
        assert!(s.check_viability(50, &cfg));
        assert!(!s.check_viability(50, &MlaxConfig::mlax(1)));
    }

    #[test]
    fn config_validation() {
        assert!(MlaxConfig::mlax(0).validate().is_err());
        let mut c = MlaxConfig::mlax(4);
        c.replace_fraction = Frac::new(15, 16);
        assert!(c.validate().is_err());
        assert!(MlaxConfig::lax_variant(8).validate().is_ok());
    }

    #[test]
    fn threshold_matches_counting() {
        let cfg = MlaxConfig::mlax(3);
        let jobs: Vec<(Time, Time)> = (1..=8).map(|x| (x, 0)).collect();
        let stacks: Vec<Vec<JobId>> = (0..8).map(|i| vec![i]).collect();
        let refs: Vec<&[JobId]> = stacks.iter().map(|v| v.as_slice()).collect();
        let s = state(&jobs, &refs);
        let thr = s.viability_threshold(&cfg);
        for laxity in 0..40 {
            assert_eq!(s.check_viability(laxity, &cfg), i128::from(laxity) <= thr, "laxity {laxity}");
        }
    }
}
