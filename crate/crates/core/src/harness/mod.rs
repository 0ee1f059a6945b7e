//! Benchmark harness: experiment configs, deterministic per-trial seeding,
//! parallel drivers and CSV/JSON/SVG output.

pub mod config;
pub mod experiments;
pub mod output;
pub mod seeds;
pub mod svg;

pub use config::{multiclass_n, planted_pq, pq_for_degree, Algorithm, ExperimentConfig, ExperimentKind};
pub use experiments::{run_experiment, ExperimentOutput, TrialResult};
pub use output::{results_csv_string, summarize, write_outputs, write_results_csv, ExperimentSummary, GroupSummary};
