//! Scheduling policies driven by the simulation kernel.

pub mod highlax;
pub mod mlax;
pub mod srpt;

pub use highlax::AdmissionEdf;
pub use mlax::{Mlax, MlaxConfig, Variant};
pub use srpt::Srpt;

use crate::job::JobId;

const NONE: usize = usize::MAX;

/// Per-machine occupancy with O(1) lookup of a job's machine.
#[derive(Debug, Clone)]
pub(crate) struct Slots {
    job_at: Vec<Option<JobId>>,
    slot_of: Vec<usize>,
    used: usize,
}

impl Slots {
    pub(crate) fn new(machines: usize) -> Self {
        Slots {
            job_at: vec![None; machines],
            slot_of: Vec::new(),
            used: 0,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.used
    }

    pub(crate) fn get(&self, slot: usize) -> Option<JobId> {
        self.job_at[slot]
    }

    pub(crate) fn contains(&self, job: JobId) -> bool {
        self.slot_of.get(job).is_some_and(|&s| s != NONE)
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = (usize, JobId)> + '_ {
        self.job_at
            .iter()
            .enumerate()
            .filter_map(|(slot, j)| j.map(|j| (slot, j)))
    }

    pub(crate) fn clear(&mut self, slot: usize) -> Option<JobId> {
        let job = self.job_at[slot].take()?;
        self.slot_of[job] = NONE;
        self.used -= 1;
        Some(job)
    }

    /// Puts `job` on the lowest free slot.
    pub(crate) fn place(&mut self, job: JobId) -> usize {
        let slot = self
            .job_at
            .iter()
            .position(Option::is_none)
            .expect("no free slot");
        self.set(slot, job);
        slot
    }

    pub(crate) fn set(&mut self, slot: usize, job: JobId) {
        if let Some(old) = self.job_at[slot].take() {
            self.slot_of[old] = NONE;
            self.used -= 1;
        }
        if self.slot_of.len() <= job {
            self.slot_of.resize(job + 1, NONE);
        }
        self.job_at[slot] = Some(job);
        self.slot_of[job] = slot;
        self.used += 1;
    }
}
