//! Exact offline optimum for small instances.

pub mod flow;
pub mod search;
pub mod slots;

pub use flow::{feasible_subset, max_processable_work, Dinic, FlowNetwork};
pub use search::{flow_upper_bound, DEFAULT_SEARCH_CAP, greedy_lower_bound, opt_throughput, OptResult, SearchBudget};
pub use slots::{feasible_subset_slots, DEFAULT_SLOT_LIMIT};
