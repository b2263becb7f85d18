//! Workbench for empirical evaluation of process discovery algorithms.
//!
//! The crate covers the full experiment pipeline: random process trees are
//! drawn from a parameterized population, compiled to Petri nets, and used to
//! simulate event logs. Logs are split into cross-validation folds; half of
//! each test fold is perturbed until it no longer fits the originating model.
//! Discovery algorithms mine a net from the training folds, exact replay
//! classifies the test traces, and precision/recall/F1 are aggregated per
//! fold. Nonparametric statistics (Kruskal-Wallis with Bonferroni-corrected
//! pairwise comparisons, and the Jonckheere trend test) compare algorithms
//! and population levels. The [`harness`] module orchestrates complete
//! experiments; the `minebench` binary exposes it on the command line.

pub mod compile;
pub mod dfg;
pub mod folds;
pub mod harness;
pub mod language;
pub mod log;
pub mod metrics;
pub mod miners;
pub mod noise;
pub mod petri;
pub mod population;
pub mod replay;
pub mod seeds;
pub mod simulate;
pub mod stats;
pub mod text;
pub mod tree;

mod book;
