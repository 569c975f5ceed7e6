//! Interval-based feasibility network and Dinic's max-flow.

use std::collections::VecDeque;

use crate::job::{Job, Time};

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
    rev: usize,
}

/// Dinic's algorithm on an adjacency-list graph with integral capacities.
#[derive(Debug, Clone)]
pub struct Dinic {
    graph: Vec<Vec<Edge>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    pub fn new(n: usize) -> Self {
        Dinic {
            graph: vec![Vec::new(); n],
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64) {
        let rev_from = self.graph[to].len();
        let rev_to = self.graph[from].len();
        self.graph[from].push(Edge { to, cap, rev: rev_from });
        self.graph[to].push(Edge { to: from, cap: 0, rev: rev_to });
    }

    fn bfs(&mut self, s: usize) {
        self.level.fill(-1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for e in &self.graph[v] {
                if e.cap > 0 && self.level[e.to] < 0 {
                    self.level[e.to] = self.level[v] + 1;
                    queue.push_back(e.to);
                }
            }
        }
    }

    fn dfs(&mut self, v: usize, t: usize, f: i64) -> i64 {
        if v == t {
            return f;
        }
        while self.iter[v] < self.graph[v].len() {
            let i = self.iter[v];
            let Edge { to, cap, rev } = self.graph[v][i];
            if cap > 0 && self.level[v] < self.level[to] {
                let d = self.dfs(to, t, f.min(cap));
                if d > 0 {
                    self.graph[v][i].cap -= d;
                    self.graph[to][rev].cap += d;
                    return d;
                }
            }
            self.iter[v] += 1;
        }
        0
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut flow = 0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return flow;
            }
            self.iter.fill(0);
            loop {
                let f = self.dfs(s, t, i64::MAX);
                if f == 0 {
                    break;
                }
                flow += f;
            }
        }
    }
}

/// Source → job (capacity `x_j`) → elementary interval (capacity = its
/// length, when inside the job's window) → sink (capacity `m` · length).
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    /// Consecutive distinct release/deadline points.
    pub breakpoints: Vec<Time>,
    pub demand: i64,
    dinic: Dinic,
    source: usize,
    sink: usize,
}

impl FlowNetwork {
    pub fn build(jobs: &[&Job], machines: usize) -> Self {
        let mut points: Vec<Time> = jobs.iter().flat_map(|j| [j.release, j.deadline]).collect();
        points.sort_unstable();
        points.dedup();
        let n = jobs.len();
        let intervals = points.len().saturating_sub(1);
        let source = 0;
        let sink = n + intervals + 1;
        let mut dinic = Dinic::new(sink + 1);
        let mut demand = 0;
        for (k, job) in jobs.iter().enumerate() {
            demand += job.size;
            dinic.add_edge(source, 1 + k, job.size);
            // Intervals are indexed by their left breakpoint.
            let lo = points.partition_point(|&p| p < job.release);
            let hi = points.partition_point(|&p| p < job.deadline);
            for iv in lo..hi {
                dinic.add_edge(1 + k, 1 + n + iv, points[iv + 1] - points[iv]);
            }
        }
        for iv in 0..intervals {
            let len = points[iv + 1] - points[iv];
            dinic.add_edge(1 + n + iv, sink, machines as i64 * len);
        }
        FlowNetwork {
            breakpoints: points,
            demand,
            dinic,
            source,
            sink,
        }
    }

    pub fn max_flow(&mut self) -> i64 {
        self.dinic.max_flow(self.source, self.sink)
    }
}

/// The jobs admit a preemptive migratory schedule on `machines` machines.
pub fn feasible_subset(jobs: &[&Job], machines: usize) -> bool {
    if jobs.is_empty() {
        return true;
    }
    let mut net = FlowNetwork::build(jobs, machines);
    net.max_flow() == net.demand
}

/// Most total work any schedule can process for `jobs` on `machines`.
pub fn max_processable_work(jobs: &[&Job], machines: usize) -> i64 {
    if jobs.is_empty() {
        return 0;
    }
    FlowNetwork::build(jobs, machines).max_flow()
}
