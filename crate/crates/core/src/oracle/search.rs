//! Largest feasible job subset by branch and bound.
//!
//! Feasibility is downward closed, so the search only ever extends feasible
//! sets. Infeasible sets are remembered and any candidate containing one is
//! rejected without a flow computation.

use serde::{Deserialize, Serialize};

use crate::job::{Instance, Job, JobId};
use crate::oracle::flow::{feasible_subset, max_processable_work};

/// Largest `n` for which a completed search is reported as optimal.
pub const DEFAULT_SEARCH_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Maximum number of feasibility tests.
    pub max_nodes: u64,
    /// Instances larger than this are never reported as optimal.
    pub cap: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_nodes: 2_000_000,
            cap: DEFAULT_SEARCH_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_count: usize,
    pub witness: Vec<JobId>,
    pub explored: u64,
    pub proven_optimal: bool,
}

struct Search<'a> {
    jobs: Vec<&'a Job>,
    machines: usize,
    budget: u64,
    explored: u64,
    exhausted: bool,
    infeasible: Vec<u64>,
    best: Vec<usize>,
    current: Vec<usize>,
}

impl Search<'_> {
    fn test(&mut self, set: &[usize]) -> bool {
        let mask = set.iter().fold(0u64, |m, &i| m | (1 << i));
        #[allow(clippy::manual_contains)]
        if self.infeasible.iter().any(|&bad| bad & mask == bad) {
            return false;
        }
        self.explored += 1;
        let refs: Vec<&Job> = set.iter().map(|&i| self.jobs[i]).collect();
        let ok = feasible_subset(&refs, self.machines);
        if !ok {
            self.infeasible.push(mask);
        }
        ok
    }

    fn dfs(&mut self, next: usize) {
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        if next == self.jobs.len() || self.current.len() + (self.jobs.len() - next) <= self.best.len() {
            return;
        }
        if self.explored >= self.budget {
            self.exhausted = true;
            return;
        }
        self.current.push(next);
        let set = self.current.clone();
        if self.test(&set) {
            self.dfs(next + 1);
        }
        self.current.pop();
        self.dfs(next + 1);
    }
}

/// Maximum number of jobs of `instance` that can all meet their deadlines on
/// `machines` machines.
pub fn opt_throughput(instance: &Instance, machines: usize, budget: SearchBudget) -> OptResult {
    let n = instance.len();
    if n > 64 {
        let witness = greedy_lower_bound(instance, machines);
        return OptResult {
            best_count: witness.len(),
            witness,
            explored: 0,
            proven_optimal: false,
        };
    }
    // Small jobs first so good incumbents appear early; ties by id.
    let mut order: Vec<&Job> = instance.jobs.iter().collect();
    order.sort_by_key(|j| (j.size, j.deadline, j.id));
    let mut search = Search {
        jobs: order,
        machines,
        budget: budget.max_nodes,
        explored: 0,
        exhausted: false,
        infeasible: Vec::new(),
        best: Vec::new(),
        current: Vec::new(),
    };
    // Whole set first: often everything fits.
    let all: Vec<usize> = (0..n).collect();
    if search.test(&all) {
        search.best = all;
    } else {
        search.dfs(0);
    }
    let mut witness: Vec<JobId> = search.best.iter().map(|&i| search.jobs[i].id).collect();
    witness.sort_unstable();
    OptResult {
        best_count: witness.len(),
        witness,
        explored: search.explored,
        proven_optimal: !search.exhausted && n <= budget.cap,
    }
}

/// Adds jobs in order of size while the set stays feasible.
pub fn greedy_lower_bound(instance: &Instance, machines: usize) -> Vec<JobId> {
    let mut order: Vec<&Job> = instance.jobs.iter().collect();
    order.sort_by_key(|j| (j.size, j.deadline, j.id));
    let mut chosen: Vec<&Job> = Vec::new();
    for job in order {
        chosen.push(job);
        if !feasible_subset(&chosen, machines) {
            chosen.pop();
        }
    }
    let mut ids: Vec<JobId> = chosen.iter().map(|j| j.id).collect();
    ids.sort_unstable();
    ids
}

/// Upper bound on the optimum: the most jobs whose sizes, smallest first,
/// fit in the maximum processable work of the whole instance.
pub fn flow_upper_bound(instance: &Instance, machines: usize) -> usize {
    let refs: Vec<&Job> = instance.jobs.iter().collect();
    let capacity = max_processable_work(&refs, machines);
    let mut sizes: Vec<i64> = instance.jobs.iter().map(|j| j.size).collect();
    sizes.sort_unstable();
    let mut used = 0;
    sizes
        .into_iter()
        .take_while(|&s| {
            used += s;
            used <= capacity
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_job() {
        let inst = Instance::from_original(&[(0, 3, 5)], 1, "").unwrap();
        let r = opt_throughput(&inst, 1, SearchBudget::default());
        assert_eq!(r.best_count, 1);
        assert!(r.proven_optimal);
    }

    #[test]
    fn identical_unit_jobs() {
        let inst = Instance::from_original(&[(0, 1, 1); 5], 3, "").unwrap();
        let r = opt_throughput(&inst, 3, SearchBudget::default());
        assert_eq!(r.best_count, 3);
        let r = opt_throughput(&inst, 1, SearchBudget::default());
        assert_eq!(r.best_count, 1);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let inst = Instance::from_original(&[(0, 1, 1); 12], 2, "").unwrap();
        let r = opt_throughput(&inst, 2, SearchBudget { max_nodes: 3, cap: 16 });
        assert!(!r.proven_optimal);
        assert!(r.best_count <= 2);
    }

    #[test]
    fn bounds_bracket_the_optimum() {
        let inst = Instance::from_original(
            &[(0, 4, 6), (1, 2, 4), (2, 3, 7), (0, 5, 5), (3, 1, 4), (4, 2, 9)],
            1,
            "",
        )
        .unwrap();
        let opt = opt_throughput(&inst, 1, SearchBudget::default());
        let lo = greedy_lower_bound(&inst, 1).len();
        let hi = flow_upper_bound(&inst, 1);
        assert!(lo <= opt.best_count && opt.best_count <= hi, "{lo} {} {hi}", opt.best_count);
    }
}
