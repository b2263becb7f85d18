//! End-to-end experiment harness.
//!
//! Wires the pipeline together: sample models per cell, simulate logs,
//! split folds, noise test traces, run every configured miner, score the
//! results and write tables, statistics and figures. Configuration and
//! journal formats are plain JSON so runs can be inspected, diffed and
//! resumed.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{CellConfig, ConfigError, ExperimentConfig, FailurePolicy, WorkUnit};
pub use report::{compute_stats, write_report, write_stats, StatsReport};
pub use runner::{
    load_records, run_experiment, sort_records, FoldRecord, HarnessError, RunRecord, RunStatus,
    RunSummary,
};
