//! Seeded instance generators.
//!
//! Every job draws from its own ChaCha stream keyed by `(seed, job index)`,
//! so job `i` is the same no matter how many jobs are generated or in which
//! order they are produced.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::job::{Instance, Job, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    Random,
    Disagreeable,
    LowLaxity,
    Mixed,
}

impl GenKind {
    pub fn name(&self) -> &'static str {
        match self {
            GenKind::Random => "random",
            GenKind::Disagreeable => "disagreeable",
            GenKind::LowLaxity => "low_laxity",
            GenKind::Mixed => "mixed",
        }
    }
}

impl std::str::FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(GenKind::Random),
            "disagreeable" => Ok(GenKind::Disagreeable),
            "low_laxity" => Ok(GenKind::LowLaxity),
            "mixed" => Ok(GenKind::Mixed),
            other => Err(Error::Spec(format!("unknown generator kind {other:?}"))),
        }
    }
}

/// Generator parameters. Times and sizes are in original ticks; the laxity
/// of a job is `floor(ratio * size)` with `ratio` drawn from the ratio range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub machines: usize,
    pub seed: u64,
    pub horizon: Time,
    pub size_min: Time,
    pub size_max: Time,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

impl GenSpec {
    pub fn new(kind: GenKind, n: usize, machines: usize, seed: u64) -> Self {
        let (ratio_min, ratio_max) = match kind {
            GenKind::Random => (0.0, 3.0),
            GenKind::LowLaxity | GenKind::Disagreeable => (0.0, 1.0),
            GenKind::Mixed => (0.0, 4.0),
        };
        GenSpec {
            kind,
            n,
            machines,
            seed,
            horizon: 40,
            size_min: 1,
            size_max: 8,
            ratio_min,
            ratio_max,
        }
    }

    pub fn horizon(mut self, horizon: Time) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn sizes(mut self, min: Time, max: Time) -> Self {
        self.size_min = min;
        self.size_max = max;
        self
    }

    pub fn ratios(mut self, min: f64, max: f64) -> Self {
        self.ratio_min = min;
        self.ratio_max = max;
        self
    }

    fn check(&self) -> Result<()> {
        if self.machines == 0 {
            return Err(Error::Spec("machine count must be positive".into()));
        }
        if self.size_min < 1 || self.size_min > self.size_max {
            return Err(Error::Spec(format!(
                "empty size range [{}, {}]",
                self.size_min, self.size_max
            )));
        }
        if !(self.ratio_min >= 0.0 && self.ratio_min <= self.ratio_max && self.ratio_max.is_finite()) {
            return Err(Error::Spec(format!(
                "empty laxity ratio range [{}, {}]",
                self.ratio_min, self.ratio_max
            )));
        }
        if self.horizon < 0 {
            return Err(Error::Spec("horizon must be non-negative".into()));
        }
        Ok(())
    }

    fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    fn label(&self) -> String {
        format!("{}-n{}-m{}-s{}", self.kind.name(), self.n, self.machines, self.seed)
    }
}

fn draw_ratio(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

fn finish(spec: &GenSpec, triples: Vec<(Time, Time, Time)>) -> Result<Instance> {
    let jobs = triples
        .into_iter()
        .enumerate()
        .map(|(id, (r, x, d))| Job::from_original(id, r, x, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(Instance::new(jobs, spec.machines, spec.label())?.with_seed(spec.seed))
}

/// Releases uniform on `[0, horizon]`, sizes uniform on the size range,
/// laxity `floor(ratio * size)`.
pub fn gen_random(spec: &GenSpec) -> Result<Instance> {
    spec.check()?;
    let triples = (0..spec.n)
        .map(|i| {
            let mut rng = spec.rng(i);
            let r = rng.gen_range(0..=spec.horizon);
            let x = rng.gen_range(spec.size_min..=spec.size_max);
            let ratio = draw_ratio(&mut rng, spec.ratio_min, spec.ratio_max);
            let laxity = (ratio * x as f64).floor() as Time;
            (r, x, r + x + laxity)
        })
        .collect();
    finish(spec, triples)
}

/// Every job has `laxity <= size`.
pub fn gen_low_laxity(spec: &GenSpec) -> Result<Instance> {
    if spec.ratio_max > 1.0 {
        return Err(Error::Spec(format!(
            "low-laxity ratio must be at most 1, got {}",
            spec.ratio_max
        )));
    }
    gen_random(spec)
}

/// Each job is low-laxity or high-laxity with equal probability; the high
/// side draws its ratio from `(1, ratio_max]`.
pub fn gen_mixed(spec: &GenSpec) -> Result<Instance> {
    spec.check()?;
    let hi_max = spec.ratio_max.max(1.5);
    let lo_max = spec.ratio_max.min(1.0);
    let triples = (0..spec.n)
        .map(|i| {
            let mut rng = spec.rng(i);
            let r = rng.gen_range(0..=spec.horizon);
            let x = rng.gen_range(spec.size_min..=spec.size_max);
            let laxity = if rng.gen_bool(0.5) {
                let ratio = draw_ratio(&mut rng, 1.0, hi_max);
                x + 1 + ((ratio - 1.0) * x as f64).floor() as Time
            } else {
                let ratio = draw_ratio(&mut rng, spec.ratio_min.min(lo_max), lo_max);
                (ratio * x as f64).floor() as Time
            };
            (r, x, r + x + laxity)
        })
        .collect();
    finish(spec, triples)
}

/// Nested windows: releases strictly increase while deadlines strictly
/// decrease. Sizes are at least half of each window, so every job is
/// low-laxity.
pub fn gen_disagreeable(spec: &GenSpec) -> Result<Instance> {
    spec.check()?;
    if spec.n == 0 {
        return Err(Error::Spec("disagreeable instances need n >= 1".into()));
    }
    let n = spec.n as Time;
    // Window k is [k*step, horizon - k*step]; the innermost must be nonempty.
    if spec.horizon < 2 * n - 1 {
        return Err(Error::Spec(format!(
            "horizon {} too small to nest {n} windows (need {})",
            spec.horizon,
            2 * n - 1
        )));
    }
    let step = (spec.horizon - 1) / (2 * (n - 1)).max(1);
    let step = step.max(1);
    let triples = (0..spec.n)
        .map(|i| {
            let k = i as Time;
            let r = k * step;
            let d = spec.horizon - k * step;
            let span = d - r;
            let mut rng = spec.rng(i);
            let x = rng.gen_range((span + 1) / 2..=span);
            (r, x, d)
        })
        .collect();
    finish(spec, triples)
}

pub fn generate(spec: &GenSpec) -> Result<Instance> {
    match spec.kind {
        GenKind::Random => gen_random(spec),
        GenKind::Disagreeable => gen_disagreeable(spec),
        GenKind::LowLaxity => gen_low_laxity(spec),
        GenKind::Mixed => gen_mixed(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::serialize_instance;
    use proptest::prelude::*;

    #[test]
    fn empty_random() {
        let inst = gen_random(&GenSpec::new(GenKind::Random, 0, 2, 1)).unwrap();
        assert!(inst.is_empty());
    }

    #[test]
    fn seed_determinism() {
        let spec = GenSpec::new(GenKind::Mixed, 25, 4, 99);
        assert_eq!(
            serialize_instance(&generate(&spec).unwrap()),
            serialize_instance(&generate(&spec).unwrap())
        );
        let other = GenSpec { seed: 100, ..spec };
        assert_ne!(generate(&other).unwrap().jobs, generate(&GenSpec::new(GenKind::Mixed, 25, 4, 99)).unwrap().jobs);
    }

    #[test]
    fn jobs_are_independent_of_n() {
        let small = gen_random(&GenSpec::new(GenKind::Random, 5, 2, 3)).unwrap();
        let large = gen_random(&GenSpec::new(GenKind::Random, 50, 2, 3)).unwrap();
        assert_eq!(small.jobs[..], large.jobs[..5]);
    }

    #[test]
    fn ratio_up_to_one_is_low_laxity() {
        let spec = GenSpec::new(GenKind::Random, 100, 2, 5).ratios(0.0, 1.0);
        let inst = gen_random(&spec).unwrap();
        assert!(inst.jobs.iter().all(|j| !j.is_high_laxity()));
    }

    #[test]
    fn low_laxity_boundaries() {
        let tight = gen_low_laxity(&GenSpec::new(GenKind::LowLaxity, 20, 2, 1).ratios(0.0, 0.0)).unwrap();
        assert!(tight.jobs.iter().all(|j| j.deadline == j.release + j.size));
        let edge = gen_low_laxity(&GenSpec::new(GenKind::LowLaxity, 20, 2, 1).ratios(1.0, 1.0)).unwrap();
        assert!(edge.jobs.iter().all(|j| j.laxity() == j.size));
        let half = gen_low_laxity(&GenSpec::new(GenKind::LowLaxity, 50, 2, 1).ratios(0.5, 0.5)).unwrap();
        assert!(half.jobs.iter().all(|j| !j.is_high_laxity()));
        assert!(gen_low_laxity(&GenSpec::new(GenKind::LowLaxity, 5, 2, 1).ratios(0.0, 1.5)).is_err());
    }

    #[test]
    fn empty_ranges_are_rejected() {
        assert!(gen_random(&GenSpec::new(GenKind::Random, 5, 2, 1).sizes(4, 3)).is_err());
        assert!(gen_random(&GenSpec::new(GenKind::Random, 5, 2, 1).ratios(2.0, 1.0)).is_err());
    }

    #[test]
    fn disagreeable_nesting() {
        let one = gen_disagreeable(&GenSpec::new(GenKind::Disagreeable, 1, 1, 0)).unwrap();
        assert_eq!(one.len(), 1);
        let two = gen_disagreeable(&GenSpec::new(GenKind::Disagreeable, 2, 1, 0)).unwrap();
        assert!(two.jobs[0].release < two.jobs[1].release && two.jobs[0].deadline > two.jobs[1].deadline);
        let five = gen_disagreeable(&GenSpec::new(GenKind::Disagreeable, 5, 1, 8)).unwrap();
        for a in &five.jobs {
            for b in &five.jobs {
                if a.release < b.release {
                    assert!(a.deadline > b.deadline);
                }
            }
            assert!(!a.is_high_laxity());
        }
        assert!(gen_disagreeable(&GenSpec::new(GenKind::Disagreeable, 30, 1, 0).horizon(10)).is_err());
    }

    #[test]
    fn mixed_has_both_sides() {
        let inst = gen_mixed(&GenSpec::new(GenKind::Mixed, 200, 2, 11)).unwrap();
        let hi = inst.jobs.iter().filter(|j| j.is_high_laxity()).count();
        assert!(hi > 50 && hi < 150, "{hi}");
    }

    proptest! {
        #[test]
        fn generated_jobs_are_valid(kind in 0usize..4, n in 0usize..40, seed in any::<u64>()) {
            let kind = [GenKind::Random, GenKind::Disagreeable, GenKind::LowLaxity, GenKind::Mixed][kind];
            let spec = GenSpec::new(kind, n.max(1), 3, seed).horizon(100);
            let inst = generate(&spec).unwrap();
            prop_assert_eq!(inst.len(), n.max(1));
            for j in &inst.jobs {
                prop_assert!(j.release + j.size <= j.deadline);
                if matches!(kind, GenKind::LowLaxity | GenKind::Disagreeable) {
                    prop_assert!(!j.is_high_laxity());
                }
            }
        }
    }
}
