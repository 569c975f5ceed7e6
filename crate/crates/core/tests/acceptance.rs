//! Acceptance suite. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use tput::experiment::{run_policy, sweep, PolicyKind, PolicySpec, SweepGrid};
use tput::formats::{ratio_summary, serialize_trace, write_results};
use tput::gen::{generate, GenKind, GenSpec};
use tput::job::classify_laxity;
use tput::oracle::{feasible_subset, feasible_subset_slots, opt_throughput, SearchBudget, DEFAULT_SLOT_LIMIT};
use tput::validate::{check_admissions, check_stack_rules, stack_accounting, validate_trace};
use tput::{AdmissionEdf, Instance, Job, SimConfig};

type Outcome = Result<String, String>;

fn out_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).expect("create output dir");
    dir
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn small_random(i: u64, n: usize, m: usize) -> Instance {
    // Releases up to 20, sizes up to 8, laxity up to 1.5 x size: deadlines stay within 40.
    let spec = GenSpec::new(GenKind::Random, n, m, i)
        .horizon(20)
        .sizes(1, 8)
        .ratios(0.0, 1.5);
    generate(&spec).expect("generate")
}

fn subset_refs(inst: &Instance, mask: u32) -> Vec<&Job> {
    inst.jobs.iter().filter(|j| mask & (1 << j.id) != 0).collect()
}

fn brute_force_opt(inst: &Instance, m: usize) -> usize {
    (0u32..1 << inst.len())
        .filter(|&mask| feasible_subset_slots(&subset_refs(inst, mask), m, DEFAULT_SLOT_LIMIT).expect("slot limit"))
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn criterion1(corpus: &mut Vec<Instance>) -> Outcome {
    let mut subsets = 0usize;
    for i in 0..500u64 {
        let n = 1 + (i as usize % 8);
        let m = 1 + (i as usize / 8) % 3;
        let inst = small_random(i, n, m);
        ensure(inst.jobs.iter().all(|j| j.original().2 <= 40), || format!("instance {i} exceeds horizon 40"))?;
        for mask in 0u32..1 << n {
            let refs = subset_refs(&inst, mask);
            let flow = feasible_subset(&refs, m);
            let slots = feasible_subset_slots(&refs, m, DEFAULT_SLOT_LIMIT).map_err(|e| e.to_string())?;
            ensure(flow == slots, || format!("instance {i} subset {mask:#b}: flow {flow} slots {slots}"))?;
            subsets += 1;
        }
        corpus.push(inst);
    }
    Ok(format!("500 instances, {subsets} subsets agree"))
}

fn criterion2(corpus: &mut Vec<Instance>) -> Outcome {
    for i in 0..100u64 {
        let n = 1 + (i as usize % 10);
        let m = 1 + (i as usize / 10) % 3;
        let inst = small_random(10_000 + i, n, m);
        let r = opt_throughput(&inst, m, SearchBudget::default());
        let brute = brute_force_opt(&inst, m);
        ensure(r.proven_optimal, || format!("instance {i} not proven optimal"))?;
        ensure(r.best_count == brute, || format!("instance {i}: search {} brute force {brute}", r.best_count))?;
        corpus.push(inst);
    }
    Ok("100 instances match exhaustive enumeration".into())
}

struct Cell {
    instance: usize,
    spec: PolicySpec,
    trace: String,
    completions: usize,
}

struct Corpus {
    instances: Vec<Instance>,
    cells: Vec<Cell>,
}

const KINDS: [GenKind; 4] = [GenKind::Random, GenKind::Mixed, GenKind::LowLaxity, GenKind::Disagreeable];
const ALPHAS: [i64; 3] = [8, 24, 64];

fn corpus_instance(i: usize) -> Instance {
    let kind = KINDS[i % 4];
    let n = 1 + (i * 7) % 30;
    let m = [8, 16, 48][i % 3];
    let horizon = match kind {
        GenKind::Disagreeable => 4 * n as i64,
        _ => [4, 8, 16, 32][(i / 12) % 4],
    };
    generate(&GenSpec::new(kind, n, m, i as u64).horizon(horizon)).expect("generate")
}

fn cell_specs() -> Vec<PolicySpec> {
    let mut specs = vec![PolicySpec::new(PolicyKind::Srpt)];
    for alpha in ALPHAS {
        for kind in [PolicyKind::Mlax, PolicyKind::LaxVariant, PolicyKind::Final] {
            specs.push(PolicySpec::new(kind).alpha(alpha));
        }
    }
    specs
}

fn build_corpus() -> Result<Corpus, String> {
    let sim = SimConfig {
        check_invariants: true,
        ..Default::default()
    };
    let instances: Vec<Instance> = (0..1000).map(corpus_instance).collect();
    let mut cells = Vec::new();
    for (k, inst) in instances.iter().enumerate() {
        for spec in cell_specs() {
            let out = run_policy(inst, &spec, &sim).map_err(|e| format!("instance {k} {}: {e}", spec.kind))?;
            cells.push(Cell {
                instance: k,
                completions: out.completions(),
                trace: serialize_trace(&out.trace),
                spec,
            });
        }
    }
    Ok(Corpus { instances, cells })
}

fn parsed(cell: &Cell) -> tput::Trace {
    tput::formats::parse_trace(&cell.trace).expect("own trace parses")
}

fn criterion3(c: &Corpus) -> Outcome {
    for cell in &c.cells {
        let inst = &c.instances[cell.instance];
        let r = validate_trace(inst, &parsed(cell), inst.machines);
        ensure(r.ok, || format!("instance {} {} α={}: {:?}", cell.instance, cell.spec.kind, cell.spec.alpha, r.violations))?;
    }
    Ok(format!("{} traces over {} instances, zero violations", c.cells.len(), c.instances.len()))
}

fn is_stack_cell(cell: &Cell) -> bool {
    matches!(cell.spec.kind, PolicyKind::Mlax | PolicyKind::LaxVariant | PolicyKind::Final)
}

fn criterion4(c: &Corpus) -> Outcome {
    let (mut runs, mut replaces) = (0, 0);
    for cell in c.cells.iter().filter(|c| is_stack_cell(c)) {
        let counters = stack_accounting(&parsed(cell)).map_err(|e| format!("instance {}: {e}", cell.instance))?;
        ensure(counters.pushes == counters.completion_pops + counters.infeasible_pops, || {
            format!("instance {}: {counters:?}", cell.instance)
        })?;
        runs += 1;
        replaces += counters.replaces;
    }
    Ok(format!("{runs} stack runs balanced, {replaces} replacements counted separately"))
}

fn criterion5(c: &Corpus) -> Outcome {
    let mut releases = 0;
    for cell in c.cells.iter().filter(|c| is_stack_cell(c)) {
        let trace = parsed(cell);
        let r = check_stack_rules(&c.instances[cell.instance], &trace);
        ensure(r.ok, || format!("instance {} {} α={}: {:?}", cell.instance, cell.spec.kind, cell.spec.alpha, r.violations))?;
        releases += trace.count(tput::EventKind::PseudoRelease);
    }
    Ok(format!("{releases} pseudo-releases replayed"))
}

fn criterion6(small: &[Instance], c: &Corpus) -> Outcome {
    let sim = SimConfig::default();
    let mut checked = 0;
    let mut opt_cache: BTreeMap<usize, usize> = BTreeMap::new();
    let opt_of = |inst: &Instance| -> Result<usize, String> {
        let r = opt_throughput(inst, inst.machines, SearchBudget::default());
        ensure(r.proven_optimal, || format!("{} not proven optimal", inst.label))?;
        Ok(r.best_count)
    };
    for inst in small {
        let opt = opt_of(inst)?;
        for kind in [PolicyKind::Srpt, PolicyKind::Mlax, PolicyKind::LaxVariant, PolicyKind::Final, PolicyKind::Edf] {
            if kind == PolicyKind::Final && inst.machines < 3 {
                continue;
            }
            let done = run_policy(inst, &PolicySpec::new(kind), &sim).map_err(|e| e.to_string())?.completions();
            ensure(done <= opt, || format!("{} {kind}: {done} > OPT {opt}", inst.label))?;
            checked += 1;
        }
    }
    for cell in &c.cells {
        let inst = &c.instances[cell.instance];
        if inst.len() > 14 {
            continue;
        }
        let opt = match opt_cache.get(&cell.instance) {
            Some(&v) => v,
            None => {
                let v = opt_of(inst)?;
                opt_cache.insert(cell.instance, v);
                v
            }
        };
        ensure(cell.completions <= opt, || {
            format!("instance {} {}: {} > OPT {opt}", cell.instance, cell.spec.kind, cell.completions)
        })?;
        checked += 1;
    }
    Ok(format!("{checked} runs bounded by OPT"))
}

fn criterion7() -> Outcome {
    let mut rows = Vec::new();
    let policies = vec![PolicyKind::Final, PolicyKind::Srpt, PolicyKind::Mlax, PolicyKind::Edf];
    for n in [10, 12, 14] {
        let mut grid = SweepGrid::new(GenSpec::new(GenKind::Mixed, n, 48, 0));
        grid.seeds = (0..50).collect();
        grid.policies = policies.clone();
        grid.with_opt = true;
        rows.extend(sweep(&grid));
    }
    if let Some(bad) = rows.iter().find(|r| !r.error.is_empty()) {
        return Err(format!("{} {}: {}", bad.label, bad.policy, bad.error));
    }
    let finals: Vec<_> = rows.iter().filter(|r| r.policy == "final").cloned().collect();
    for r in &finals {
        ensure(r.opt_kind == "exact", || format!("{}: OPT not exact", r.label))?;
        if r.opt.unwrap_or(0) >= 1 {
            ensure(r.ratio.is_some_and(|x| x > 0.0), || format!("{}: ratio {:?}", r.label, r.ratio))?;
        }
    }
    let summary = ratio_summary(&finals).ok_or("no ratios")?;
    // Recorded only: how often the composition matches every standalone component.
    let dominated = finals
        .iter()
        .filter(|f| {
            rows.iter()
                .filter(|r| r.label == f.label && r.policy != "final")
                .all(|r| f.completions >= r.completions)
        })
        .count();
    let path = out_dir().join("competitiveness.results.csv");
    write_results(&rows, File::create(&path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    Ok(format!(
        "{} instances, min ratio {:.4}, mean ratio {:.4}, final >= every component on {:.1}% ({})",
        summary.cells,
        summary.min,
        summary.mean,
        100.0 * dominated as f64 / finals.len() as f64,
        path.display()
    ))
}

fn criterion8(c: &Corpus) -> Outcome {
    for cell in &c.cells {
        let inst = &c.instances[cell.instance];
        let again = run_policy(inst, &cell.spec, &SimConfig::default()).map_err(|e| e.to_string())?;
        ensure(serialize_trace(&again.trace) == cell.trace, || {
            format!("instance {} {} α={} differs on rerun", cell.instance, cell.spec.kind, cell.spec.alpha)
        })?;
    }
    Ok(format!("{} traces byte-identical on rerun", c.cells.len()))
}

fn criterion9() -> Outcome {
    let m = 100;
    let mut lines = vec!["n,m,policy,completions,records,seconds,ns_per_record".to_string()];
    let mut per_record: BTreeMap<(&str, usize), f64> = BTreeMap::new();
    let mut worst: f64 = 0.0;
    for n in [10_000usize, 100_000] {
        // Releases spread so that the average load is about 1.5x capacity.
        let horizon = (n as i64 * 9) / (2 * m as i64 * 3 / 2).max(1);
        let inst = generate(&GenSpec::new(GenKind::Mixed, n, m, 7).horizon(horizon)).map_err(|e| e.to_string())?;
        for kind in [PolicyKind::Srpt, PolicyKind::Mlax] {
            let start = Instant::now();
            let out = run_policy(&inst, &PolicySpec::new(kind), &SimConfig::default()).map_err(|e| e.to_string())?;
            let secs = start.elapsed().as_secs_f64();
            let records = out.trace.intervals.len() + out.trace.events.len() + out.trace.completions.len();
            let ns = secs * 1e9 / records.max(1) as f64;
            lines.push(format!("{n},{m},{kind},{},{records},{secs:.4},{ns:.1}", out.completions()));
            per_record.insert((kind.name(), n), ns);
            if n == 100_000 {
                worst = worst.max(secs);
                ensure(secs < 5.0, || format!("{kind} took {secs:.2}s on n = {n}"))?;
            }
        }
    }
    let path = out_dir().join("scaling.results.csv");
    std::fs::write(&path, lines.join("\n") + "\n").map_err(|e| e.to_string())?;
    let growth = ["srpt", "mlax"]
        .iter()
        .map(|p| per_record[&(*p, 100_000)] / per_record[&(*p, 10_000)])
        .fold(0.0f64, f64::max);
    ensure(growth < 4.0, || format!("time per record grew {growth:.2}x from n = 10k to 100k"))?;
    Ok(format!(
        "slowest 100k run {worst:.2}s, per-record cost grew {growth:.2}x over 10x n ({})",
        path.display()
    ))
}

fn criterion10(c: &Corpus) -> Outcome {
    let mut admitted = 0;
    for (k, inst) in c.instances.iter().enumerate() {
        let (hi, _) = classify_laxity(&inst.jobs);
        let ids: Vec<usize> = hi.iter().map(|j| j.id).collect();
        let (sub, _) = inst.subset(&ids);
        let mut policy = AdmissionEdf::new(sub.machines);
        let trace = tput::simulate(&sub, &mut policy, &SimConfig::default()).map_err(|e| e.to_string())?;
        let r = check_admissions(&sub, &trace);
        ensure(r.ok, || format!("instance {k}: {:?}", r.violations))?;
        admitted += trace.count(tput::EventKind::Admit);
    }
    for cell in c.cells.iter().filter(|c| c.spec.kind == PolicyKind::Final) {
        let r = check_admissions(&c.instances[cell.instance], &parsed(cell));
        ensure(r.ok, || format!("instance {} final: {:?}", cell.instance, r.violations))?;
    }
    Ok(format!("{admitted} admitted high-laxity jobs all met their deadlines"))
}

fn run(label: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into()))
    });
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(detail) => {
            println!("PASS  {label:<34} {detail} [{secs:.1}s]");
            true
        }
        Err(detail) => {
            println!("FAIL  {label:<34} {detail} [{secs:.1}s]");
            false
        }
    }
}

fn main() {
    let mut small = Vec::new();
    let mut results = Vec::new();
    results.push(run("1 oracle equivalence", || criterion1(&mut small)));
    results.push(run("2 OPT correctness", || criterion2(&mut small)));
    let corpus = match build_corpus() {
        Ok(c) => Some(c),
        Err(e) => {
            println!("corpus build failed: {e}");
            None
        }
    };
    let on_corpus = |f: &dyn Fn(&Corpus) -> Outcome| -> Outcome {
        match &corpus {
            Some(c) => f(c),
            None => Err("corpus unavailable".into()),
        }
    };
    results.push(run("3 validator suite", || on_corpus(&criterion3)));
    results.push(run("4 stack accounting", || on_corpus(&criterion4)));
    results.push(run("5 stack rule conformance", || on_corpus(&criterion5)));
    results.push(run("6 online <= offline", || on_corpus(&|c| criterion6(&small, c))));
    results.push(run("7 empirical competitiveness", criterion7));
    results.push(run("8 determinism", || on_corpus(&criterion8)));
    results.push(run("9 performance", criterion9));
    results.push(run("10 admission soundness", || on_corpus(&criterion10)));

    let passed = results.iter().filter(|&&ok| ok).count();
    let mut stdout = std::io::stdout();
    let _ = writeln!(stdout, "\nacceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}

