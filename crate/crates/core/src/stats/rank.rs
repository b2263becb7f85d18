//! Pooled average ranking.

/// Ranks all values across groups ascending, splitting ties by average
/// rank, and returns the ranks in the input shape.
pub fn rank_all(groups: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pooled: Vec<(f64, usize, usize)> = Vec::new();
    for (g, vals) in groups.iter().enumerate() {
        for (i, &v) in vals.iter().enumerate() {
            pooled.push((v, g, i));
        }
    }
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ranks: Vec<Vec<f64>> = groups.iter().map(|g| vec![0.0; g.len()]).collect();
    let mut pos = 0;
    while pos < pooled.len() {
        let mut end = pos + 1;
        while end < pooled.len() && pooled[end].0 == pooled[pos].0 {
            end += 1;
        }
        // Positions pos..end share the value; average their 1-based ranks.
        let avg = (pos + 1 + end) as f64 / 2.0;
        for &(_, g, i) in &pooled[pos..end] {
            ranks[g][i] = avg;
        }
        pos = end;
    }
    ranks
}

/// Sizes of runs of tied values across all groups, for tie corrections.
pub fn tie_runs(groups: &[Vec<f64>]) -> Vec<usize> {
    let mut all: Vec<f64> = groups.iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    let mut runs = Vec::new();
    let mut pos = 0;
    while pos < all.len() {
        let mut end = pos + 1;
        while end < all.len() && all[end] == all[pos] {
            end += 1;
        }
        runs.push(end - pos);
        pos = end;
    }
    runs
}
