//! Online preemptive throughput maximization on identical machines.
//!
//! Jobs have a release time, a processing size and a deadline; a schedule
//! earns one point per job finished by its deadline. The crate provides a
//! discrete-event kernel, the SRPT and stack-based (MLax) online policies,
//! their three-way composition, an exact offline optimum for small
//! instances, trace validation, seeded generators and file formats.

pub mod compose;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod gantt;
pub mod gen;
pub mod job;
pub mod oracle;
pub mod par;
pub mod policy;
pub mod trace;
pub mod validate;

pub use compose::{run_final, FinalAlg, FinalConfig, FinalRun};
pub use engine::{simulate, Assignment, Policy, PolicyInfo, PolicyStats, SimConfig};
pub use error::{Error, Result};
pub use experiment::{run_policy, sweep, PolicyKind, PolicySpec, RunOutcome, SweepGrid};
pub use gen::{generate, GenKind, GenSpec};
pub use job::{Frac, Instance, Job, JobId, Time, INFINITE, TICK_SCALE};
pub use oracle::{opt_throughput, OptResult, SearchBudget};
pub use policy::{AdmissionEdf, Mlax, MlaxConfig, Srpt, Variant};
pub use trace::{EventKind, PolicyEvent, RunInterval, Trace};
pub use validate::{validate_all, validate_trace, ValidationReport, Violation};
