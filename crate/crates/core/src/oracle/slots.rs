//! Unit-slot feasibility: give every job `x_j` distinct unit slots inside
//! its window with at most `m` jobs per slot. Solved by augmenting paths on
//! the job/slot bipartite graph, independently of the interval network.

use crate::error::{Error, Result};
use crate::job::{Job, Time};

/// Default cap on `horizon * machines`.
pub const DEFAULT_SLOT_LIMIT: usize = 20_000;

fn gcd(a: Time, b: Time) -> Time {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

struct Matching {
    /// `window[j] = (first slot, one past last slot)`.
    window: Vec<(usize, usize)>,
    uses: Vec<Vec<bool>>,
    occupants: Vec<Vec<usize>>,
    capacity: usize,
    visited: Vec<bool>,
}

impl Matching {
    /// Finds one more slot for `job`, possibly moving other jobs.
    fn augment(&mut self, job: usize) -> bool {
        let (lo, hi) = self.window[job];
        for s in lo..hi {
            if self.uses[job][s] || self.visited[s] {
                continue;
            }
            self.visited[s] = true;
            if self.occupants[s].len() < self.capacity {
                self.take(job, s);
                return true;
            }
            for k in 0..self.occupants[s].len() {
                let other = self.occupants[s][k];
                if self.augment(other) {
                    // `other` now also holds a new slot; release `s` from it.
                    self.release(other, s);
                    self.take(job, s);
                    return true;
                }
            }
        }
        false
    }

    fn take(&mut self, job: usize, s: usize) {
        self.uses[job][s] = true;
        self.occupants[s].push(job);
    }

    fn release(&mut self, job: usize, s: usize) {
        self.uses[job][s] = false;
        let pos = self.occupants[s].iter().position(|&o| o == job).expect("occupant");
        self.occupants[s].swap_remove(pos);
    }
}

/// Unit-slot feasibility test. Values are divided by their common gcd first,
/// which leaves the answer unchanged.
pub fn feasible_subset_slots(jobs: &[&Job], machines: usize, slot_limit: usize) -> Result<bool> {
    if jobs.is_empty() {
        return Ok(true);
    }
    let start = jobs.iter().map(|j| j.release).min().expect("non-empty");
    let g = jobs
        .iter()
        .fold(0, |g, j| gcd(gcd(gcd(g, j.release - start), j.size), j.deadline - start));
    let g = g.max(1);
    let end = jobs.iter().map(|j| j.deadline).max().expect("non-empty");
    let horizon = ((end - start) / g) as usize;
    if horizon.saturating_mul(machines) > slot_limit {
        return Err(Error::Scale(format!(
            "{horizon} slots x {machines} machines exceeds the limit of {slot_limit}"
        )));
    }
    let mut matching = Matching {
        window: jobs
            .iter()
            .map(|j| (((j.release - start) / g) as usize, ((j.deadline - start) / g) as usize))
            .collect(),
        uses: vec![vec![false; horizon]; jobs.len()],
        occupants: vec![Vec::new(); horizon],
        capacity: machines,
        visited: vec![false; horizon],
    };
    for (k, job) in jobs.iter().enumerate() {
        let units = job.size / g;
        for _ in 0..units {
            matching.visited.fill(false);
            if !matching.augment(k) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(v: &[(Time, Time, Time)], m: usize) -> bool {
        let jobs: Vec<Job> = v
            .iter()
            .enumerate()
            .map(|(i, &(r, x, d))| Job::new(i, r, x, d).unwrap())
            .collect();
        let refs: Vec<&Job> = jobs.iter().collect();
        feasible_subset_slots(&refs, m, DEFAULT_SLOT_LIMIT).unwrap()
    }

    #[test]
    fn examples() {
        assert!(feasible_subset_slots(&[], 1, 10).unwrap());
        assert!(!check(&[(0, 5, 5), (0, 5, 5)], 1));
        assert!(check(&[(0, 3, 4), (0, 3, 4)], 2));
        assert!(check(&[(0, 1, 1)], 1));
        assert!(!check(&[(0, 2, 2), (1, 1, 2)], 1));
    }

    #[test]
    fn needs_reshuffling() {
        // Job 0 greedily takes slot 0; job 1 fits only in slot 0.
        assert!(check(&[(0, 1, 2), (0, 1, 1)], 1));
        assert!(check(&[(0, 2, 3), (0, 2, 3), (0, 2, 3)], 2));
    }

    #[test]
    fn scale_limit() {
        let j = Job::new(0, 0, 1, 1000).unwrap();
        assert!(matches!(feasible_subset_slots(&[&j], 30, 20_000), Err(Error::Scale(_))));
    }
}
