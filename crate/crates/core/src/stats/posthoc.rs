//! Pairwise comparisons after a Kruskal-Wallis rejection.
//!
//! Two groups differ when their mean ranks are at least the critical
//! difference apart: z at level alpha / (k (k - 1)) scaled by the pooled
//! rank standard error sqrt(N (N + 1) / 12 * (1 / n_i + 1 / n_j)). The
//! divisor k (k - 1) is a Bonferroni adjustment over all ordered pairs,
//! equivalent to two-sided testing of the unordered ones.

use super::dist::normal_quantile;
use super::rank::rank_all;
use super::StatsError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub i: usize,
    pub j: usize,
    pub mean_rank_diff: f64,
    pub critical: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posthoc {
    pub alpha: f64,
    pub z: f64,
    pub pairs: Vec<PairComparison>,
    /// Group sizes differ; the per-pair standard errors already account
    /// for it, but the design is unbalanced.
    pub unequal_sizes: bool,
}

pub fn posthoc_pairwise(groups: &[Vec<f64>], alpha: f64) -> Result<Posthoc, StatsError> {
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::TooFewGroups(2, k));
    }
    if let Some(g) = groups.iter().position(|g| g.is_empty()) {
        return Err(StatsError::EmptyGroup(g));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::BadAlpha(alpha));
    }
    let n: usize = groups.iter().map(|g| g.len()).sum();
    let nf = n as f64;
    let ranks = rank_all(groups);
    let mean_ranks: Vec<f64> = ranks
        .iter()
        .map(|g| g.iter().sum::<f64>() / g.len() as f64)
        .collect();
    let z = normal_quantile(1.0 - alpha / (k * (k - 1)) as f64);
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let se = (nf * (nf + 1.0) / 12.0
                * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64))
                .sqrt();
            let critical = z * se;
            let diff = (mean_ranks[i] - mean_ranks[j]).abs();
            pairs.push(PairComparison {
                i,
                j,
                mean_rank_diff: diff,
                critical,
                significant: diff >= critical,
            });
        }
    }
    let unequal_sizes = groups.windows(2).any(|w| w[0].len() != w[1].len());
    Ok(Posthoc { alpha, z, pairs, unequal_sizes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_groups_cannot_reach_significance() {
        // Mean ranks 1.5 and 3.5 differ by 2.0; the critical difference at
        // alpha 0.05 is 1.959964 * sqrt(20 / 12) = 2.5303.
        let p = posthoc_pairwise(&[vec![1.0, 2.0], vec![3.0, 4.0]], 0.05).unwrap();
        assert_eq!(p.pairs.len(), 1);
        let pair = &p.pairs[0];
        assert!((pair.mean_rank_diff - 2.0).abs() < 1e-12);
        assert!((pair.critical - 2.53030262376332).abs() < 1e-9);
        assert!(!pair.significant);
        assert!(!p.unequal_sizes);
    }

    #[test]
    fn clear_separation_is_significant() {
        let lo: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let hi: Vec<f64> = (0..20).map(|i| 100.0 + i as f64).collect();
        let p = posthoc_pairwise(&[lo, hi], 0.05).unwrap();
        assert!(p.pairs[0].significant);
    }

    #[test]
    fn all_pairs_enumerated_in_order() {
        let groups = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        let p = posthoc_pairwise(&groups, 0.05).unwrap();
        let idx: Vec<(usize, usize)> = p.pairs.iter().map(|c| (c.i, c.j)).collect();
        assert_eq!(idx, vec![(0, 1), (0, 2), (1, 2)]);
        // Bonferroni divisor k (k - 1) = 6.
        let z6 = super::super::dist::normal_quantile(1.0 - 0.05 / 6.0);
        assert!((p.z - z6).abs() < 1e-12);
    }

    #[test]
    fn unbalanced_designs_are_flagged() {
        let p = posthoc_pairwise(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0]], 0.05).unwrap();
        assert!(p.unequal_sizes);
    }

    #[test]
    fn bad_alpha_rejected() {
        assert_eq!(
            posthoc_pairwise(&[vec![1.0], vec![2.0]], 1.5),
            Err(StatsError::BadAlpha(1.5))
        );
    }
}
