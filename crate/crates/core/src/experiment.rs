//! Running policies by name and sweeping parameter grids.

use serde::{Deserialize, Serialize};

use crate::compose::{run_final, FinalConfig};
use crate::engine::{simulate, Policy, PolicyStats, SimConfig};
use crate::error::{Error, Result};
use crate::formats::ResultRow;
use crate::gen::{generate, GenSpec};
use crate::job::Instance;
use crate::oracle::{flow_upper_bound, opt_throughput, SearchBudget};
use crate::par;
use crate::policy::{AdmissionEdf, Mlax, MlaxConfig, Srpt};
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Srpt,
    Mlax,
    LaxVariant,
    Final,
    Edf,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Srpt,
        PolicyKind::Mlax,
        PolicyKind::LaxVariant,
        PolicyKind::Final,
        PolicyKind::Edf,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Srpt => "srpt",
            PolicyKind::Mlax => "mlax",
            PolicyKind::LaxVariant => "lax_variant",
            PolicyKind::Final => "final",
            PolicyKind::Edf => "edf",
        }
    }

    pub fn uses_alpha(&self) -> bool {
        matches!(self, PolicyKind::Mlax | PolicyKind::LaxVariant | PolicyKind::Final)
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown policy {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub alpha: i64,
    /// Overrides the default stack fractions of the chosen variant.
    pub stack: Option<MlaxConfig>,
    pub high_laxity: String,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        PolicySpec {
            kind,
            alpha: MlaxConfig::default().alpha,
            stack: None,
            high_laxity: crate::policy::highlax::EDF.into(),
        }
    }

    pub fn alpha(mut self, alpha: i64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn stack_config(&self) -> MlaxConfig {
        if let Some(cfg) = self.stack {
            return cfg;
        }
        match self.kind {
            PolicyKind::LaxVariant => MlaxConfig::lax_variant(self.alpha),
            _ => MlaxConfig::mlax(self.alpha),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: Trace,
    pub stats: Vec<PolicyStats>,
}

impl RunOutcome {
    pub fn completions(&self) -> usize {
        self.trace.completions.len()
    }
}

fn run_single(instance: &Instance, mut policy: impl Policy, sim: &SimConfig) -> Result<RunOutcome> {
    let trace = simulate(instance, &mut policy, sim)?;
    Ok(RunOutcome {
        trace,
        stats: policy.stats(),
    })
}

/// Simulates one policy on all of the instance's machines.
pub fn run_policy(instance: &Instance, spec: &PolicySpec, sim: &SimConfig) -> Result<RunOutcome> {
    let m = instance.machines;
    match spec.kind {
        PolicyKind::Srpt => run_single(instance, Srpt::new(m), sim),
        PolicyKind::Edf => run_single(instance, AdmissionEdf::new(m), sim),
        PolicyKind::Mlax | PolicyKind::LaxVariant => {
            run_single(instance, Mlax::new(m, spec.stack_config())?, sim)
        }
        PolicyKind::Final => {
            let cfg = FinalConfig {
                stack: spec.stack_config(),
                high_laxity: spec.high_laxity.clone(),
            };
            let run = run_final(instance, m, &cfg, sim)?;
            Ok(RunOutcome {
                trace: run.trace,
                stats: run.stats,
            })
        }
    }
}

/// Offline reference value for ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptValue {
    Exact(usize),
    /// Upper bound only; ratios computed against it are lower bounds.
    Bound(usize),
}

impl OptValue {
    pub fn value(&self) -> usize {
        match *self {
            OptValue::Exact(v) | OptValue::Bound(v) => v,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            OptValue::Exact(_) => "exact",
            OptValue::Bound(_) => "bound",
        }
    }
}

/// Exact optimum when the search is proven within `budget`, otherwise the
/// flow upper bound.
pub fn reference_opt(instance: &Instance, budget: SearchBudget) -> OptValue {
    if instance.len() <= budget.cap {
        let r = opt_throughput(instance, instance.machines, budget);
        if r.proven_optimal {
            return OptValue::Exact(r.best_count);
        }
    }
    OptValue::Bound(flow_upper_bound(instance, instance.machines))
}

fn empty_row(instance: &Instance, spec: &PolicySpec) -> ResultRow {
    ResultRow {
        label: instance.label.clone(),
        seed: instance.seed.unwrap_or(0),
        n: instance.len(),
        m: instance.machines,
        alpha: spec.alpha,
        policy: spec.kind.name().into(),
        completions: 0,
        opt: None,
        opt_kind: String::new(),
        ratio: None,
        virtual_completions: 0,
        physical_completions: 0,
        pushes: 0,
        replaces: 0,
        completion_pops: 0,
        infeasible_pops: 0,
        error: String::new(),
    }
}

/// One results row. Failures are recorded in the `error` column.
pub fn result_row(instance: &Instance, spec: &PolicySpec, opt: Option<OptValue>, sim: &SimConfig) -> ResultRow {
    let mut row = empty_row(instance, spec);
    let outcome = match run_policy(instance, spec, sim) {
        Ok(o) => o,
        Err(e) => {
            row.error = e.to_string();
            return row;
        }
    };
    let completions = outcome.completions();
    row.completions = completions;
    row.physical_completions = completions;
    for s in outcome.stats.iter().filter(|s| s.policy != crate::compose::NAME) {
        row.virtual_completions += s.virtual_completions;
        row.pushes += s.pushes;
        row.replaces += s.replaces;
        row.completion_pops += s.completion_pops;
        row.infeasible_pops += s.infeasible_pops;
    }
    if let Some(opt) = opt {
        row.opt = Some(opt.value());
        row.opt_kind = opt.kind().into();
        if opt.value() > 0 {
            row.ratio = Some(completions as f64 / opt.value() as f64);
        }
    }
    row
}

/// Cartesian grid of generated instances and policy settings.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    /// Template; `machines` and `seed` are overwritten per cell.
    pub gen: GenSpec,
    pub machines: Vec<usize>,
    pub seeds: Vec<u64>,
    pub alphas: Vec<i64>,
    pub policies: Vec<PolicyKind>,
    pub high_laxity: String,
    pub with_opt: bool,
    pub budget: SearchBudget,
}

impl SweepGrid {
    pub fn new(gen: GenSpec) -> Self {
        SweepGrid {
            machines: vec![gen.machines],
            seeds: vec![gen.seed],
            gen,
            alphas: vec![MlaxConfig::default().alpha],
            policies: vec![PolicyKind::Srpt, PolicyKind::Mlax, PolicyKind::LaxVariant, PolicyKind::Final],
            high_laxity: crate::policy::highlax::EDF.into(),
            with_opt: false,
            budget: SearchBudget::default(),
        }
    }

    pub fn cells(&self) -> usize {
        self.machines.len() * self.seeds.len() * self.alphas.len() * self.policies.len()
    }
}

fn instance_rows(grid: &SweepGrid, m: usize, seed: u64) -> Vec<ResultRow> {
    let specs: Vec<PolicySpec> = grid
        .alphas
        .iter()
        .flat_map(|&alpha| {
            grid.policies.iter().map(move |&kind| PolicySpec {
                high_laxity: grid.high_laxity.clone(),
                ..PolicySpec::new(kind).alpha(alpha)
            })
        })
        .collect();
    let gen = GenSpec {
        machines: m,
        seed,
        ..grid.gen.clone()
    };
    let instance = match generate(&gen) {
        Ok(i) => i,
        Err(e) => {
            let stub = Instance::new(Vec::new(), m.max(1), format!("{}-seed{seed}", gen.kind.name()))
                .expect("empty instance")
                .with_seed(seed);
            return specs
                .iter()
                .map(|spec| ResultRow {
                    n: gen.n,
                    m,
                    error: e.to_string(),
                    ..empty_row(&stub, spec)
                })
                .collect();
        }
    };
    let opt = grid.with_opt.then(|| reference_opt(&instance, grid.budget));
    let sim = SimConfig::default();
    specs
        .iter()
        .map(|spec| result_row(&instance, spec, opt, &sim))
        .collect()
}

/// Runs every cell of `grid`. Rows come out in grid order
/// (machines, seed, α, policy) whatever the scheduling of the work.
pub fn sweep(grid: &SweepGrid) -> Vec<ResultRow> {
    let points = sweep_points(grid);
    par::map(&points, |&(m, seed)| instance_rows(grid, m, seed))
        .into_iter()
        .flatten()
        .collect()
}

/// Same as [`sweep`] without the thread pool.
pub fn sweep_seq(grid: &SweepGrid) -> Vec<ResultRow> {
    let points = sweep_points(grid);
    par::map_seq(&points, |&(m, seed)| instance_rows(grid, m, seed))
        .into_iter()
        .flatten()
        .collect()
}

fn sweep_points(grid: &SweepGrid) -> Vec<(usize, u64)> {
    grid.machines
        .iter()
        .flat_map(|&m| grid.seeds.iter().map(move |&s| (m, s)))
        .collect()
}
