//! Kruskal-Wallis rank test.

use super::dist::chi_square_sf;
use super::rank::{rank_all, tie_runs};
use super::StatsError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KruskalWallis {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub group_sizes: Vec<usize>,
    pub group_mean_ranks: Vec<f64>,
    pub n: usize,
}

/// H = 12 / (N (N + 1)) * sum(R_j^2 / n_j) - 3 (N + 1), divided by the tie
/// correction 1 - sum(t^3 - t) / (N^3 - N), with a chi-square upper tail on
/// k - 1 degrees of freedom.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<KruskalWallis, StatsError> {
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::TooFewGroups(2, k));
    }
    if let Some(g) = groups.iter().position(|g| g.is_empty()) {
        return Err(StatsError::EmptyGroup(g));
    }
    let n: usize = groups.iter().map(|g| g.len()).sum();
    let ranks = rank_all(groups);
    let nf = n as f64;
    let mut h = 0.0;
    let mut mean_ranks = Vec::with_capacity(k);
    for group in &ranks {
        let sum: f64 = group.iter().sum();
        mean_ranks.push(sum / group.len() as f64);
        h += sum * sum / group.len() as f64;
    }
    // Single division keeps small untied examples exact (e.g. 48/20 = 2.4).
    h = (12.0 * h - 3.0 * nf * (nf + 1.0) * (nf + 1.0)) / (nf * (nf + 1.0));
    let tie_sum: f64 = tie_runs(groups)
        .into_iter()
        .map(|t| (t * t * t - t) as f64)
        .sum();
    let correction = 1.0 - tie_sum / (nf * nf * nf - nf);
    if correction <= 0.0 {
        return Err(StatsError::AllTied);
    }
    let statistic = h / correction;
    let df = k - 1;
    Ok(KruskalWallis {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df as f64),
        group_sizes: groups.iter().map(|g| g.len()).collect(),
        group_mean_ranks: mean_ranks,
        n,
    })
}
