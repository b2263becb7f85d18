//! Jonckheere-Terpstra test for ordered alternatives.
//!
//! J sums, over every ordered group pair (i, j) with i < j, the number of
//! observation pairs where the earlier group's value is smaller, counting
//! ties as one half. Large J supports an increasing trend in the given
//! group order. Small designs are evaluated exactly by enumerating all
//! reassignments of the pooled values to the group sizes; larger ones use
//! the normal approximation with the standard null mean and variance.

use super::dist::normal_cdf;
use super::StatsError;
use serde::{Deserialize, Serialize};

/// Largest total sample size evaluated exactly.
pub const EXACT_LIMIT: usize = 12;
/// Cap on enumerated arrangements; beyond it the approximation is used.
const MAX_ARRANGEMENTS: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jonckheere {
    pub statistic: f64,
    pub null_mean: f64,
    pub null_variance: f64,
    pub z: f64,
    /// One-sided p for an increasing trend (large J).
    pub p_increasing: f64,
    /// One-sided p for a decreasing trend (small J).
    pub p_decreasing: f64,
    /// True when the p values come from full enumeration.
    pub exact: bool,
}

pub fn jonckheere(groups: &[Vec<f64>]) -> Result<Jonckheere, StatsError> {
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::TooFewGroups(2, k));
    }
    if let Some(g) = groups.iter().position(|g| g.is_empty()) {
        return Err(StatsError::EmptyGroup(g));
    }
    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    let n: usize = sizes.iter().sum();
    let statistic = j_statistic(groups);
    let nf = n as f64;
    let sq: f64 = sizes.iter().map(|&s| (s * s) as f64).sum();
    let null_mean = (nf * nf - sq) / 4.0;
    let null_variance = (nf * nf * (2.0 * nf + 3.0)
        - sizes
            .iter()
            .map(|&s| (s * s) as f64 * (2.0 * s as f64 + 3.0))
            .sum::<f64>())
        / 72.0;
    if null_variance <= 0.0 {
        return Err(StatsError::AllTied);
    }
    let z = (statistic - null_mean) / null_variance.sqrt();

    if n <= EXACT_LIMIT && arrangements(&sizes) <= MAX_ARRANGEMENTS {
        let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
        let mut at_least = 0u64;
        let mut at_most = 0u64;
        let mut total = 0u64;
        enumerate_assignments(&pooled, &sizes, &mut |j| {
            total += 1;
            if j >= statistic - 1e-9 {
                at_least += 1;
            }
            if j <= statistic + 1e-9 {
                at_most += 1;
            }
        });
        return Ok(Jonckheere {
            statistic,
            null_mean,
            null_variance,
            z,
            p_increasing: at_least as f64 / total as f64,
            p_decreasing: at_most as f64 / total as f64,
            exact: true,
        });
    }
    Ok(Jonckheere {
        statistic,
        null_mean,
        null_variance,
        z,
        p_increasing: 1.0 - normal_cdf(z),
        p_decreasing: normal_cdf(z),
        exact: false,
    })
}

fn j_statistic(groups: &[Vec<f64>]) -> f64 {
    let mut j = 0.0;
    for a in 0..groups.len() {
        for b in a + 1..groups.len() {
            for &x in &groups[a] {
                for &y in &groups[b] {
                    if x < y {
                        j += 1.0;
                    } else if x == y {
                        j += 0.5;
                    }
                }
            }
        }
    }
    j
}

fn arrangements(sizes: &[usize]) -> u128 {
    // N! / prod(n_j!) computed as a product of binomials.
    let mut remaining: usize = sizes.iter().sum();
    let mut total: u128 = 1;
    for &s in sizes {
        total = total.saturating_mul(binomial(remaining, s));
        remaining -= s;
    }
    total
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    out
}

/// Calls `f` with the J statistic of every distinct assignment of the
/// pooled values to groups of the given sizes.
fn enumerate_assignments(pooled: &[f64], sizes: &[usize], f: &mut impl FnMut(f64)) {
    let n = pooled.len();
    let mut assignment = vec![usize::MAX; n];
    fill_group(pooled, sizes, 0, &mut assignment, f);
}

fn fill_group(
    pooled: &[f64],
    sizes: &[usize],
    group: usize,
    assignment: &mut Vec<usize>,
    f: &mut impl FnMut(f64),
) {
    if group == sizes.len() {
        let groups: Vec<Vec<f64>> = (0..sizes.len())
            .map(|g| {
                pooled
                    .iter()
                    .zip(assignment.iter())
                    .filter(|&(_, &a)| a == g)
                    .map(|(&v, _)| v)
                    .collect()
            })
            .collect();
        f(j_statistic(&groups));
        return;
    }
    // Choose `sizes[group]` unassigned slots; the last group takes the rest.
    let free: Vec<usize> = (0..pooled.len()).filter(|&i| assignment[i] == usize::MAX).collect();
    if group == sizes.len() - 1 {
        for &i in &free {
            assignment[i] = group;
        }
        fill_group(pooled, sizes, group + 1, assignment, f);
        for &i in &free {
            assignment[i] = usize::MAX;
        }
        return;
    }
    choose(&free, sizes[group], 0, &mut Vec::new(), &mut |chosen| {
        for &i in chosen {
            assignment[i] = group;
        }
        fill_group(pooled, sizes, group + 1, assignment, f);
        for &i in chosen {
            assignment[i] = usize::MAX;
        }
    });
}

fn choose(
    items: &[usize],
    k: usize,
    start: usize,
    current: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if current.len() == k {
        f(current);
        return;
    }
    for idx in start..items.len() {
        if items.len() - idx < k - current.len() {
            break;
        }
        current.push(items[idx]);
        choose(items, k, idx + 1, current, f);
        current.pop();
    }
}
