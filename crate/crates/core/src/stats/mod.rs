//! Rank-based statistics for comparing miners and detecting trends.
//!
//! Everything here works on groups of scores. Ranking is shared: values are
//! pooled, sorted ascending and given average ranks on ties. On top sit the
//! Kruskal-Wallis test (any difference between groups), a pairwise post hoc
//! procedure with a Bonferroni-adjusted critical difference, and the
//! Jonckheere-Terpstra test for ordered alternatives.

pub mod dist;
pub mod jonckheere;
pub mod kruskal;
pub mod posthoc;
pub mod rank;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {0} groups, got {1}")]
    TooFewGroups(usize, usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("all observations are identical")]
    AllTied,
    #[error("alpha {0} outside (0, 1)")]
    BadAlpha(f64),
}

pub use jonckheere::{jonckheere, Jonckheere};
pub use kruskal::{kruskal_wallis, KruskalWallis};
pub use posthoc::{posthoc_pairwise, PairComparison, Posthoc};
pub use rank::rank_all;
