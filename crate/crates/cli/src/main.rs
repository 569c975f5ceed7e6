use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use log::{debug, info};
use tput::compose::GUARANTEE_MACHINES;
use tput::experiment::{reference_opt, result_row, run_policy, sweep, PolicyKind, PolicySpec, SweepGrid};
use tput::formats::{
    parse_instance, parse_trace, ratio_summary, serialize_instance, serialize_trace, write_results, ResultRow,
};
use tput::gantt::{render_svg, GanttStyle};
use tput::gen::{generate, GenKind, GenSpec};
use tput::oracle::{opt_throughput, SearchBudget, DEFAULT_SEARCH_CAP};
use tput::validate::validate_all;
use tput::{Frac, Instance, MlaxConfig, SimConfig};

#[derive(Parser)]
#[command(name = "tput", version, about = "Online preemptive throughput scheduling on identical machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance file.
    Gen(GenArgs),
    /// Simulate one policy on an instance, validate the trace and print a results row.
    Run(RunArgs),
    /// Run a grid of generated instances and policies.
    Sweep(SweepArgs),
    /// Exact offline optimum of an instance.
    Opt(OptArgs),
    /// Check a trace file against its instance.
    Validate(ValidateArgs),
    /// Render a trace file as an SVG Gantt chart.
    Gantt(GanttArgs),
}

#[derive(Args, Clone)]
struct GenOpts {
    /// random, disagreeable, low_laxity or mixed.
    #[arg(long, default_value = "mixed")]
    kind: GenKind,
    /// Number of jobs.
    #[arg(long = "num-jobs", short = 'n', default_value_t = 20)]
    n: usize,
    /// Latest release time, in original ticks.
    #[arg(long, default_value_t = 40)]
    horizon: i64,
    #[arg(long, default_value_t = 1)]
    size_min: i64,
    #[arg(long, default_value_t = 8)]
    size_max: i64,
    /// Laxity-to-size ratio range.
    #[arg(long)]
    ratio_min: Option<f64>,
    #[arg(long)]
    ratio_max: Option<f64>,
}

impl GenOpts {
    fn spec(&self, machines: usize, seed: u64) -> GenSpec {
        let mut spec = GenSpec::new(self.kind, self.n, machines, seed)
            .horizon(self.horizon)
            .sizes(self.size_min, self.size_max);
        spec.ratio_min = self.ratio_min.unwrap_or(spec.ratio_min);
        spec.ratio_max = self.ratio_max.unwrap_or(spec.ratio_max);
        spec
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    gen: GenOpts,
    #[arg(long, short = 'm', default_value_t = 48)]
    machines: usize,
    #[arg(long, required = true)]
    seed: u64,
    /// Output path; stdout when absent.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct PolicyOpts {
    /// Stack scheduler α.
    #[arg(long, default_value_t = 24)]
    alpha: i64,
    /// Viability fraction, e.g. 7/8.
    #[arg(long)]
    viability: Option<Frac>,
    /// Replacement quorum fraction, e.g. 3/4.
    #[arg(long)]
    replace: Option<Frac>,
    /// High-laxity scheduler of the composition.
    #[arg(long, default_value = "edf")]
    highlax: String,
}

impl PolicyOpts {
    fn spec(&self, kind: PolicyKind) -> PolicySpec {
        let mut spec = PolicySpec::new(kind).alpha(self.alpha);
        spec.high_laxity = self.highlax.clone();
        if self.viability.is_some() || self.replace.is_some() {
            let mut cfg = spec.stack_config();
            if let Some(f) = self.viability {
                cfg.viability_fraction = f;
            }
            if let Some(f) = self.replace {
                cfg.replace_fraction = f;
            }
            spec.stack = Some(cfg);
        }
        spec
    }
}

#[derive(Args)]
struct RunArgs {
    /// Instance file (.inst.json).
    #[arg(long, short = 'i')]
    instance: PathBuf,
    /// srpt, mlax, lax_variant, final or edf.
    #[arg(long, short = 'p', default_value = "final")]
    policy: PolicyKind,
    /// Overrides the instance's machine count.
    #[arg(long, short = 'm')]
    machines: Option<usize>,
    #[command(flatten)]
    opts: PolicyOpts,
    /// Compute the offline optimum (exact up to n = 16, flow bound above).
    #[arg(long)]
    with_opt: bool,
    /// Trace output (.trace.jsonl).
    #[arg(long, short = 't')]
    trace: Option<PathBuf>,
    /// Results output (.results.csv); stdout when absent.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    gen: GenOpts,
    /// First seed of the range.
    #[arg(long, required = true)]
    seed: u64,
    /// Number of consecutive seeds.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, short = 'm', value_delimiter = ',', default_value = "48")]
    machines: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "24")]
    alpha: Vec<i64>,
    #[arg(long, short = 'p', value_delimiter = ',', default_value = "srpt,mlax,lax_variant,final")]
    policy: Vec<PolicyKind>,
    #[arg(long, default_value = "edf")]
    highlax: String,
    #[arg(long)]
    with_opt: bool,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "TPUT_JOBS")]
    jobs: Option<usize>,
    /// Results output (.results.csv); stdout when absent.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptArgs {
    #[arg(long, short = 'i')]
    instance: PathBuf,
    #[arg(long, short = 'm')]
    machines: Option<usize>,
    /// Feasibility tests before giving up.
    #[arg(long, default_value_t = 2_000_000)]
    max_nodes: u64,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, short = 'i')]
    instance: PathBuf,
    #[arg(long, short = 't')]
    trace: PathBuf,
}

#[derive(Args)]
struct GanttArgs {
    #[arg(long, short = 't')]
    trace: PathBuf,
    /// Pixels per internal tick.
    #[arg(long, default_value_t = 8.0)]
    scale: f64,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Violation(String),
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => std::io::stdout().write_all(bytes).context("cannot write to stdout"),
    }
}

fn load_instance(path: &Path, machines: Option<usize>) -> anyhow::Result<Instance> {
    let inst = parse_instance(&read(path)?).with_context(|| format!("invalid instance {}", path.display()))?;
    Ok(match machines {
        Some(m) => inst.with_machines(m),
        None => inst,
    })
}

fn warn_regime(kind: PolicyKind, m: usize) {
    if kind == PolicyKind::Final && m < GUARANTEE_MACHINES {
        eprintln!("warning: m = {m} is below the m ≥ {GUARANTEE_MACHINES} regime of the final composition");
    }
}

fn results_bytes(rows: &[ResultRow]) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_results(rows, &mut buf)?;
    Ok(buf)
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let inst = generate(&a.gen.spec(a.machines, a.seed)).context("generator")?;
    emit(a.out.as_deref(), serialize_instance(&inst).as_bytes())?;
    Ok(())
}

fn cmd_run(a: RunArgs) -> CmdResult {
    let inst = load_instance(&a.instance, a.machines)?;
    let spec = a.opts.spec(a.policy);
    spec.stack_config().validate().context("stack parameters")?;
    warn_regime(a.policy, inst.machines);
    let opt = a.with_opt.then(|| reference_opt(&inst, SearchBudget::default()));
    let row = match run_policy(&inst, &spec, &SimConfig::default()) {
        Ok(outcome) => {
            let report = validate_all(&inst, &outcome.trace);
            if let Some(path) = &a.trace {
                fs::write(path, serialize_trace(&outcome.trace))
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            if !report.ok {
                let first = &report.violations[0];
                return Err(Failure::Violation(format!(
                    "{} violations, first: {} at t={}: {}",
                    report.violations.len(),
                    first.rule,
                    first.time,
                    first.detail
                )));
            }
            debug!("validated {} completions", report.completions);
            result_row(&inst, &spec, opt, &SimConfig::default())
        }
        Err(e @ tput::Error::Config(_)) => {
            eprintln!("warning: {e}");
            let mut row = result_row(&inst, &spec, opt, &SimConfig::default());
            row.error = e.to_string();
            row
        }
        Err(e) => return Err(Failure::Usage(e.into())),
    };
    eprintln!(
        "{}: {} of {} jobs completed{}",
        row.policy,
        row.completions,
        row.n,
        match (row.opt, row.ratio) {
            (Some(o), Some(r)) => format!(", OPT ({}) {o}, ratio {r:.4}", row.opt_kind),
            (Some(o), None) => format!(", OPT ({}) {o}", row.opt_kind),
            _ => String::new(),
        }
    );
    emit(a.out.as_deref(), &results_bytes(&[row])?)?;
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> CmdResult {
    let first = a.machines.first().copied().context("empty machine list")?;
    let mut grid = SweepGrid::new(a.gen.spec(first, a.seed));
    grid.machines = a.machines.clone();
    grid.seeds = (a.seed..a.seed + a.seeds).collect();
    grid.alphas = a.alpha.clone();
    grid.policies = a.policy.clone();
    grid.high_laxity = a.highlax.clone();
    grid.with_opt = a.with_opt;
    for &alpha in &grid.alphas {
        MlaxConfig::mlax(alpha).validate().context("stack parameters")?;
    }
    if grid.policies.contains(&PolicyKind::Final) {
        for &m in &grid.machines {
            warn_regime(PolicyKind::Final, m);
        }
    }
    info!("sweeping {} cells", grid.cells());
    let rows = run_sweep(&grid, a.jobs)?;
    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} cells failed; see the error column", rows.len());
    }
    if let Some(s) = ratio_summary(&rows) {
        eprintln!("{} cells with a ratio: min {:.4}, mean {:.4}", s.cells, s.min, s.mean);
    }
    emit(a.out.as_deref(), &results_bytes(&rows)?)?;
    Ok(())
}

#[cfg(feature = "parallel")]
fn run_sweep(grid: &SweepGrid, jobs: Option<usize>) -> anyhow::Result<Vec<ResultRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("thread pool")?;
    Ok(pool.install(|| sweep(grid)))
}

#[cfg(not(feature = "parallel"))]
fn run_sweep(grid: &SweepGrid, _jobs: Option<usize>) -> anyhow::Result<Vec<ResultRow>> {
    Ok(sweep(grid))
}

fn cmd_opt(a: OptArgs) -> CmdResult {
    let inst = load_instance(&a.instance, a.machines)?;
    if inst.len() > DEFAULT_SEARCH_CAP {
        eprintln!(
            "warning: n = {} exceeds the exact-search cap of {DEFAULT_SEARCH_CAP}; the result is not proven optimal",
            inst.len()
        );
    }
    let budget = SearchBudget {
        max_nodes: a.max_nodes,
        cap: DEFAULT_SEARCH_CAP,
    };
    let r = opt_throughput(&inst, inst.machines, budget);
    let json = serde_json::json!({
        "best_count": r.best_count,
        "witness_ids": r.witness,
        "proven_optimal": r.proven_optimal,
        "explored": r.explored,
    });
    emit(None, format!("{json}\n").as_bytes())?;
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> CmdResult {
    let inst = load_instance(&a.instance, None)?;
    let trace = parse_trace(&read(&a.trace)?).with_context(|| format!("invalid trace {}", a.trace.display()))?;
    let inst = inst.with_machines(trace.header.machines);
    let report = validate_all(&inst, &trace);
    let text = serde_json::to_string_pretty(&report).context("report")?;
    emit(None, format!("{text}\n").as_bytes())?;
    if report.ok {
        Ok(())
    } else {
        Err(Failure::Violation(format!("{} violations", report.violations.len())))
    }
}

fn cmd_gantt(a: GanttArgs) -> CmdResult {
    if a.scale.is_nan() || a.scale <= 0.0 {
        return Err(anyhow!("--scale must be positive").into());
    }
    let trace = parse_trace(&read(&a.trace)?).with_context(|| format!("invalid trace {}", a.trace.display()))?;
    let style = GanttStyle {
        px_per_tick: a.scale,
        ..Default::default()
    };
    emit(a.out.as_deref(), render_svg(&trace, &style).as_bytes())?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SCHED_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Opt(a) => cmd_opt(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Gantt(a) => cmd_gantt(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
