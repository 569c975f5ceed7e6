//! On-disk formats: instances (`.inst.json`), traces (`.trace.jsonl`) and
//! experiment results (`.results.csv`). Field names are frozen in FORMAT.md.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::job::{Instance, Job, Time};
use crate::trace::{Completion, EventKind, PolicyEvent, RunInterval, Trace, TraceHeader};

pub const INSTANCE_VERSION: u32 = 1;
pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobRecord {
    id: usize,
    release: Time,
    size: Time,
    deadline: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    version: u32,
    machines: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    jobs: Vec<JobRecord>,
}

/// Parses and validates an instance file; values are doubled internally.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    if file.version != INSTANCE_VERSION {
        return Err(Error::Instance(format!(
            "unsupported instance version {} (expected {INSTANCE_VERSION})",
            file.version
        )));
    }
    let mut seen = std::collections::HashSet::new();
    let mut jobs = Vec::with_capacity(file.jobs.len());
    for rec in &file.jobs {
        if !seen.insert(rec.id) {
            return Err(Error::Validation {
                job: rec.id,
                reason: "duplicate id".into(),
            });
        }
        jobs.push(Job::from_original(rec.id, rec.release, rec.size, rec.deadline)?);
    }
    let mut inst = Instance::new(jobs, file.machines, file.label.unwrap_or_default())?;
    inst.seed = file.seed;
    Ok(inst)
}

/// Pretty-printed JSON in original ticks, jobs ordered by id.
pub fn serialize_instance(instance: &Instance) -> String {
    let file = InstanceFile {
        version: INSTANCE_VERSION,
        machines: instance.machines,
        label: (!instance.label.is_empty()).then(|| instance.label.clone()),
        seed: instance.seed,
        jobs: instance
            .jobs
            .iter()
            .map(|j| {
                let (release, size, deadline) = j.original();
                JobRecord {
                    id: j.id,
                    release,
                    size,
                    deadline,
                }
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("instance serializes");
    text.push('\n');
    text
}

/// Short content hash of the canonical instance text.
pub fn instance_hash(instance: &Instance) -> String {
    let digest = Sha256::digest(serialize_instance(instance).as_bytes());
    hex::encode(&digest[..8])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceRecord {
    t: Time,
    kind: String,
    job: usize,
    machine: Option<usize>,
    extra: Option<i64>,
}

const RUN: &str = "run";
const COMPLETE: &str = "complete";

fn kind_from_str(s: &str) -> Option<EventKind> {
    use EventKind::*;
    [
        PseudoRelease,
        Push,
        Replace,
        CompletionPop,
        InfeasiblePop,
        WindowExpiry,
        Admit,
        Reject,
        VirtualCompletion,
    ]
    .into_iter()
    .find(|k| k.as_str() == s)
}

/// One header line, then one record per line. Records are ordered by time;
/// within one instant, completions (by job) come first, then policy events
/// in the order they happened, then interval starts (by machine).
pub fn serialize_trace(trace: &Trace) -> String {
    let mut keyed: Vec<((Time, u8, usize), TraceRecord)> = Vec::new();
    for c in &trace.completions {
        keyed.push((
            (c.time, 0, c.job),
            TraceRecord {
                t: c.time,
                kind: COMPLETE.into(),
                job: c.job,
                machine: None,
                extra: None,
            },
        ));
    }
    for (seq, e) in trace.events.iter().enumerate() {
        keyed.push((
            (e.time, 1, seq),
            TraceRecord {
                t: e.time,
                kind: e.kind.as_str().into(),
                job: e.job,
                machine: e.machine,
                extra: e.extra,
            },
        ));
    }
    for iv in &trace.intervals {
        keyed.push((
            (iv.start, 2, iv.machine),
            TraceRecord {
                t: iv.start,
                kind: RUN.into(),
                job: iv.job,
                machine: Some(iv.machine),
                extra: Some(iv.end),
            },
        ));
    }
    keyed.sort_by_key(|(k, _)| *k);
    let mut out = serde_json::to_string(&trace.header).expect("header serializes");
    out.push('\n');
    for (_, rec) in keyed {
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

fn at_line(line: usize, e: serde_json::Error) -> Error {
    Error::Parse {
        line,
        column: e.column(),
        reason: e.to_string(),
    }
}

pub fn parse_trace(text: &str) -> Result<Trace> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(Error::Parse {
        line: 1,
        column: 1,
        reason: "empty trace: missing header".into(),
    })?;
    let header: TraceHeader = serde_json::from_str(first).map_err(|e| at_line(1, e))?;
    let mut intervals = Vec::new();
    let mut completions = Vec::new();
    let mut events = Vec::new();
    let mut last_t = Time::MIN;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let rec: TraceRecord = serde_json::from_str(line).map_err(|e| at_line(lineno, e))?;
        let bad = |reason: String| Error::Parse {
            line: lineno,
            column: 1,
            reason,
        };
        if rec.t < last_t {
            return Err(bad(format!("time {} goes backwards", rec.t)));
        }
        last_t = rec.t;
        match rec.kind.as_str() {
            RUN => {
                let machine = rec.machine.ok_or_else(|| bad("run record without machine".into()))?;
                let end = rec.extra.ok_or_else(|| bad("run record without end time".into()))?;
                intervals.push(RunInterval {
                    machine,
                    job: rec.job,
                    start: rec.t,
                    end,
                });
            }
            COMPLETE => completions.push(Completion {
                job: rec.job,
                time: rec.t,
            }),
            other => {
                let kind = kind_from_str(other).ok_or_else(|| bad(format!("unknown kind {other:?}")))?;
                events.push(PolicyEvent {
                    time: rec.t,
                    kind,
                    job: rec.job,
                    machine: rec.machine,
                    extra: rec.extra,
                });
            }
        }
    }
    intervals.sort_by_key(|iv| (iv.start, iv.machine));
    completions.sort_by_key(|c| (c.time, c.job));
    Ok(Trace {
        header,
        intervals,
        completions,
        events,
    })
}

/// One experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub label: String,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub alpha: i64,
    pub policy: String,
    pub completions: usize,
    pub opt: Option<usize>,
    /// `exact`, `bound` or empty.
    pub opt_kind: String,
    pub ratio: Option<f64>,
    pub virtual_completions: usize,
    pub physical_completions: usize,
    pub pushes: usize,
    pub replaces: usize,
    pub completion_pops: usize,
    pub infeasible_pops: usize,
    pub error: String,
}

/// Summary line appended to a results file as a `#` comment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSummary {
    pub cells: usize,
    pub min: f64,
    pub mean: f64,
}

pub fn ratio_summary(rows: &[ResultRow]) -> Option<RatioSummary> {
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    if ratios.is_empty() {
        return None;
    }
    Some(RatioSummary {
        cells: ratios.len(),
        min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        mean: ratios.iter().sum::<f64>() / ratios.len() as f64,
    })
}

pub fn write_results<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for row in rows {
        wtr.serialize(row)?;
    }
    if rows.is_empty() {
        wtr.write_record([
            "label",
            "seed",
            "n",
            "m",
            "alpha",
            "policy",
            "completions",
            "opt",
            "opt_kind",
            "ratio",
            "virtual_completions",
            "physical_completions",
            "pushes",
            "replaces",
            "completion_pops",
            "infeasible_pops",
            "error",
        ])?;
    }
    wtr.flush()?;
    let mut out = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    if let Some(s) = ratio_summary(rows) {
        writeln!(out, "# cells={} min_ratio={:.6} mean_ratio={:.6}", s.cells, s.min, s.mean)?;
    }
    Ok(())
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}
