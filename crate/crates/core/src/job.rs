//! Jobs, instances and the laxity/feasibility primitives.
//!
//! All times are integer ticks. Instances are read in "original" ticks and
//! every value is doubled on ingestion, so half a job's laxity is always a
//! whole number of ticks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in time or a length of time, in internal ticks.
pub type Time = i64;

/// Dense job identifier, `0..n`.
pub type JobId = usize;

/// Factor applied to every input value on ingestion.
pub const TICK_SCALE: Time = 2;

/// Stand-in for the infinite size/laxity of a stack sentinel.
pub const INFINITE: Time = Time::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub release: Time,
    pub size: Time,
    pub deadline: Time,
}

impl Job {
    /// Builds a job from internal-tick values, rejecting jobs that cannot
    /// finish inside their window.
    pub fn new(id: JobId, release: Time, size: Time, deadline: Time) -> Result<Job> {
        if size <= 0 {
            return Err(Error::Validation {
                job: id,
                reason: format!("size must be positive, got {size}"),
            });
        }
        if release < 0 {
            return Err(Error::Validation {
                job: id,
                reason: format!("release must be non-negative, got {release}"),
            });
        }
        let earliest_finish = release
            .checked_add(size)
            .ok_or_else(|| Error::Overflow(format!("computing release + size of job {id}")))?;
        if earliest_finish > deadline {
            return Err(Error::Validation {
                job: id,
                reason: format!(
                    "release + size = {earliest_finish} exceeds deadline {deadline}"
                ),
            });
        }
        Ok(Job {
            id,
            release,
            size,
            deadline,
        })
    }

    /// Builds a job from original (pre-doubling) ticks.
    pub fn from_original(id: JobId, release: Time, size: Time, deadline: Time) -> Result<Job> {
        let scale = |v: Time, what: &str| {
            v.checked_mul(TICK_SCALE)
                .ok_or_else(|| Error::Overflow(format!("scaling {what} of job {id}")))
        };
        Job::new(
            id,
            scale(release, "release")?,
            scale(size, "size")?,
            scale(deadline, "deadline")?,
        )
    }

    /// `(deadline - release) - size`: how long the job may sit idle and still
    /// finish on time.
    pub fn laxity(&self) -> Time {
        self.deadline - self.release - self.size
    }

    /// End of the window in which the job may become viable for MLax.
    pub fn viability_window_end(&self) -> Time {
        self.release + self.laxity() / 2
    }

    pub fn is_high_laxity(&self) -> bool {
        self.laxity() > self.size
    }

    /// Values in original ticks, `(release, size, deadline)`.
    pub fn original(&self) -> (Time, Time, Time) {
        (
            self.release / TICK_SCALE,
            self.size / TICK_SCALE,
            self.deadline / TICK_SCALE,
        )
    }
}

/// Free-standing form of [`Job::laxity`].
pub fn laxity(job: &Job) -> Time {
    job.laxity()
}

/// Remaining work of a job as seen by one scheduler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JobState {
    pub job: Job,
    pub remaining: Time,
    pub completed_at: Option<Time>,
}

impl JobState {
    pub fn new(job: Job) -> Self {
        JobState {
            job,
            remaining: job.size,
            completed_at: None,
        }
    }

    /// Applies `amount` units of processing ending at `now`.
    pub fn process(&mut self, amount: Time, now: Time) {
        debug_assert!(amount >= 0 && amount <= self.remaining);
        self.remaining -= amount;
        if self.remaining == 0 && self.completed_at.is_none() {
            self.completed_at = Some(now);
        }
    }

    pub fn is_feasible(&self, t: Time) -> bool {
        is_feasible(self.remaining, self.job.deadline, t)
    }
}

/// A job with `remaining` work left can still meet `deadline` when started at `t`.
#[inline]
pub fn is_feasible(remaining: Time, deadline: Time, t: Time) -> bool {
    remaining > 0 && t + remaining <= deadline
}

/// Splits jobs into the high-laxity side (`laxity > size`) and the low side.
pub fn classify_laxity(jobs: &[Job]) -> (Vec<Job>, Vec<Job>) {
    jobs.iter().partition(|j| j.is_high_laxity())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub jobs: Vec<Job>,
    pub machines: usize,
    pub label: String,
    pub seed: Option<u64>,
}

impl Instance {
    /// Checks machine count and that ids are exactly `0..n`; sorts jobs by id.
    pub fn new(mut jobs: Vec<Job>, machines: usize, label: impl Into<String>) -> Result<Self> {
        if machines == 0 {
            return Err(Error::Instance("machine count must be positive".into()));
        }
        jobs.sort_by_key(|j| j.id);
        for w in jobs.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::Validation {
                    job: w[0].id,
                    reason: "duplicate id".into(),
                });
            }
        }
        for (pos, job) in jobs.iter().enumerate() {
            if job.id != pos {
                return Err(Error::Validation {
                    job: job.id,
                    reason: format!("ids must be dense 0..{}", jobs.len()),
                });
            }
            Job::new(job.id, job.release, job.size, job.deadline)?;
        }
        Ok(Instance {
            jobs,
            machines,
            label: label.into(),
            seed: None,
        })
    }

    /// Builds an instance from `(release, size, deadline)` triples in
    /// original ticks; ids follow input order.
    pub fn from_original(
        triples: &[(Time, Time, Time)],
        machines: usize,
        label: impl Into<String>,
    ) -> Result<Self> {
        let jobs = triples
            .iter()
            .enumerate()
            .map(|(id, &(r, x, d))| Job::from_original(id, r, x, d))
            .collect::<Result<Vec<_>>>()?;
        Instance::new(jobs, machines, label)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_machines(mut self, machines: usize) -> Self {
        self.machines = machines;
        self
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn job(&self, id: JobId) -> &Job {
        &self.jobs[id]
    }

    /// Restricts the instance to `ids`, renumbering densely. Returns the new
    /// instance and the map from new id to old id.
    pub fn subset(&self, ids: &[JobId]) -> (Instance, Vec<JobId>) {
        let jobs = ids
            .iter()
            .enumerate()
            .map(|(new, &old)| Job {
                id: new,
                ..self.jobs[old]
            })
            .collect();
        (
            Instance {
                jobs,
                machines: self.machines,
                label: self.label.clone(),
                seed: self.seed,
            },
            ids.to_vec(),
        )
    }
}

/// A rational in `(0, 1]`, used for machine-count thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Frac {
    pub num: u32,
    pub den: u32,
}

impl Frac {
    pub const fn new(num: u32, den: u32) -> Self {
        Frac { num, den }
    }

    /// `ceil(self * m)`.
    pub fn ceil_of(&self, m: usize) -> usize {
        let num = self.num as usize * m;
        num.div_ceil(self.den as usize)
    }

    pub fn as_f64(&self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }

    /// Exact `self <= other`.
    pub fn le(&self, other: &Frac) -> bool {
        u64::from(self.num) * u64::from(other.den) <= u64::from(other.num) * u64::from(self.den)
    }
}

impl std::fmt::Display for Frac {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl std::str::FromStr for Frac {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("expected a fraction like 7/8, got {s:?}"));
        let (n, d) = s.split_once('/').ok_or_else(bad)?;
        let num: u32 = n.trim().parse().map_err(|_| bad())?;
        let den: u32 = d.trim().parse().map_err(|_| bad())?;
        if den == 0 || num == 0 || num > den {
            return Err(Error::Config(format!("fraction {s} must lie in (0, 1]")));
        }
        Ok(Frac { num, den })
    }
}

impl Serialize for Frac {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Frac {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
