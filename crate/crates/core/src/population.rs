//! Random process tree populations.
//!
//! A population is parameterized by a size range (triangular distribution
//! over visible activity counts), relative construct probabilities for the
//! five operators, and probabilities for silent XOR branches, duplicate
//! labels, long-term dependencies, and skewed (infrequent) choice weights.
//!
//! Generation is top-down: the sampled activity budget is split uniformly
//! among 2 or 3 children at each operator node until single activities
//! remain. A silent XOR branch is added by diverting the whole budget to the
//! remaining branches, so the visible activity count always matches the
//! sampled size. Labels are assigned afterwards; each leaf after the first
//! reuses an earlier label with a probability compensated so the expected
//! duplicate fraction over many leaves equals `p_duplicate`.

use crate::seeds::rng_for;
use crate::tree::{LongTermDep, ProcessTree, TreeNode};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Triangular};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    /// Bounds and mode of the triangular distribution over visible activity
    /// counts.
    pub size_min: usize,
    pub size_mode: usize,
    pub size_max: usize,
    /// Relative construct probabilities; normalized before use.
    pub p_seq: f64,
    pub p_xor: f64,
    pub p_and: f64,
    pub p_or: f64,
    pub p_loop: f64,
    /// Probability that a generated XOR gains a silent skip branch.
    #[serde(default)]
    pub p_silent: f64,
    /// Probability that an activity label duplicates an earlier one.
    #[serde(default)]
    pub p_duplicate: f64,
    /// Probability per eligible XOR pair of adding a long-term dependency.
    #[serde(default)]
    pub p_ltdep: f64,
    /// Skew choice weights so one branch dominates.
    #[serde(default)]
    pub infrequent_paths: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum PopulationError {
    #[error("construct probabilities are all zero")]
    AllZero,
    #[error("construct probability {0} is negative")]
    Negative(f64),
    #[error("sizes must satisfy 1 <= min <= mode <= max, got {0}/{1}/{2}")]
    BadSizes(usize, usize, usize),
    #[error("probability {0}={1} outside [0, 1]")]
    BadProbability(&'static str, f64),
    #[error("requested {0} models, need at least 1")]
    BadCount(usize),
}

/// Normalizes the five construct probabilities to sum to 1.
pub fn normalize_construct_probs(probs: [f64; 5]) -> Result<[f64; 5], PopulationError> {
    if let Some(&p) = probs.iter().find(|p| **p < 0.0) {
        return Err(PopulationError::Negative(p));
    }
    let sum: f64 = probs.iter().sum();
    if sum <= 0.0 {
        return Err(PopulationError::AllZero);
    }
    Ok(probs.map(|p| p / sum))
}

impl PopulationSpec {
    pub fn construct_probs(&self) -> Result<[f64; 5], PopulationError> {
        normalize_construct_probs([self.p_seq, self.p_xor, self.p_and, self.p_or, self.p_loop])
    }

    pub fn validate(&self) -> Result<(), PopulationError> {
        if !(1 <= self.size_min && self.size_min <= self.size_mode && self.size_mode <= self.size_max)
        {
            return Err(PopulationError::BadSizes(
                self.size_min,
                self.size_mode,
                self.size_max,
            ));
        }
        self.construct_probs()?;
        for (name, p) in [
            ("p_silent", self.p_silent),
            ("p_duplicate", self.p_duplicate),
            ("p_ltdep", self.p_ltdep),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(PopulationError::BadProbability(name, p));
            }
        }
        Ok(())
    }
}

/// Draws a visible activity count from the population's triangular size
/// distribution, rounded to the nearest integer.
pub fn sample_size(spec: &PopulationSpec, rng: &mut impl Rng) -> usize {
    if spec.size_min == spec.size_max {
        return spec.size_min;
    }
    let tri = Triangular::new(
        spec.size_min as f64,
        spec.size_max as f64,
        spec.size_mode as f64,
    )
    .expect("validated sizes");
    let v = tri.sample(rng).round() as usize;
    v.clamp(spec.size_min, spec.size_max)
}

/// Generates one tree. The spec must be valid.
pub fn generate_tree(spec: &PopulationSpec, rng: &mut impl Rng) -> ProcessTree {
    debug_assert!(spec.validate().is_ok());
    let probs = spec.construct_probs().expect("validated spec");
    let n = sample_size(spec, rng);
    let mut root = structure(n, &probs, spec, rng);
    assign_labels(&mut root, spec.p_duplicate, rng);
    add_dependencies(root, spec.p_ltdep, rng)
}

/// Generates `count` trees, one derived sub-seed per model.
pub fn sample_models(
    spec: &PopulationSpec,
    count: usize,
    seed: u64,
) -> Result<Vec<ProcessTree>, PopulationError> {
    spec.validate()?;
    if count == 0 {
        return Err(PopulationError::BadCount(0));
    }
    Ok((0..count)
        .map(|i| {
            let mut rng = rng_for(seed, &["population", &i.to_string()]);
            generate_tree(spec, &mut rng)
        })
        .collect())
}

const OP_SEQ: usize = 0;
const OP_XOR: usize = 1;
const OP_AND: usize = 2;
const OP_OR: usize = 3;
const OP_LOOP: usize = 4;

fn structure(n: usize, probs: &[f64; 5], spec: &PopulationSpec, rng: &mut impl Rng) -> TreeNode {
    if n <= 1 {
        // Label assigned in a later pass.
        return TreeNode::Activity(String::new());
    }
    let op = draw_index(probs, rng);
    let arity = *[2usize, 3].choose(rng).expect("nonempty");
    match op {
        OP_SEQ => {
            let parts = composition(n, arity.min(n), rng);
            TreeNode::Seq(parts.iter().map(|&p| structure(p, probs, spec, rng)).collect())
        }
        OP_AND => {
            let parts = composition(n, arity.min(n), rng);
            TreeNode::And(parts.iter().map(|&p| structure(p, probs, spec, rng)).collect())
        }
        OP_XOR => {
            let silent = rng.random_bool(spec.p_silent);
            let real = if silent { (arity - 1).min(n) } else { arity.min(n) };
            let parts = composition(n, real, rng);
            let mut children: Vec<TreeNode> =
                parts.iter().map(|&p| structure(p, probs, spec, rng)).collect();
            if silent {
                let at = rng.random_range(0..=children.len());
                children.insert(at, TreeNode::Silent);
            }
            let weights = choice_weights(children.len(), spec.infrequent_paths, rng);
            TreeNode::Xor { children, weights }
        }
        OP_OR => {
            let parts = composition(n, arity.min(n), rng);
            let children: Vec<TreeNode> =
                parts.iter().map(|&p| structure(p, probs, spec, rng)).collect();
            let weights = choice_weights(children.len(), spec.infrequent_paths, rng);
            TreeNode::Or { children, weights }
        }
        OP_LOOP => {
            let parts = composition(n, 2, rng);
            TreeNode::Loop {
                body: Box::new(structure(parts[0], probs, spec, rng)),
                redo: Box::new(structure(parts[1], probs, spec, rng)),
                exit_prob: 0.5,
            }
        }
        _ => unreachable!(),
    }
}

fn draw_index(probs: &[f64; 5], rng: &mut impl Rng) -> usize {
    let mut u: f64 = rng.random();
    for (i, p) in probs.iter().enumerate() {
        u -= p;
        if u < 0.0 {
            return i;
        }
    }
    4
}

/// Uniform composition of `n` into `k` positive parts: `k - 1` distinct cut
/// points drawn from the `n - 1` gaps.
fn composition(n: usize, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    debug_assert!(k >= 1 && n >= k);
    if k == 1 {
        return vec![n];
    }
    let mut cuts = rand::seq::index::sample(rng, n - 1, k - 1).into_vec();
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts {
        parts.push(c + 1 - prev);
        prev = c + 1;
    }
    parts.push(n - prev);
    parts
}

/// Uniform weights, or one dominant branch (weight in [0.75, 0.9], the rest
/// sharing the remainder) when infrequent paths are requested.
fn choice_weights(k: usize, infrequent: bool, rng: &mut impl Rng) -> Vec<f64> {
    if !infrequent {
        return vec![1.0; k];
    }
    let dominant = rng.random_range(0..k);
    let d: f64 = rng.random_range(0.75..0.9);
    let rest = (1.0 - d) / (k as f64 - 1.0);
    (0..k).map(|i| if i == dominant { d } else { rest }).collect()
}

fn assign_labels(root: &mut TreeNode, p_duplicate: f64, rng: &mut impl Rng) {
    let total = root.visible_count();
    // The first leaf can never duplicate; compensate the later leaves so the
    // expected duplicated fraction over all leaves is p_duplicate.
    let p_eff = if total >= 2 {
        (p_duplicate * total as f64 / (total as f64 - 1.0)).min(1.0)
    } else {
        0.0
    };
    let mut used: Vec<String> = Vec::new();
    let mut fresh = 0usize;
    walk_leaves(root, &mut |slot| {
        let reuse = !used.is_empty() && rng.random_bool(p_eff);
        let label = if reuse {
            used.choose(rng).expect("nonempty").clone()
        } else {
            let l = format!("a{fresh}");
            fresh += 1;
            l
        };
        used.push(label.clone());
        *slot = label;
    });
}

fn walk_leaves(node: &mut TreeNode, f: &mut impl FnMut(&mut String)) {
    match node {
        TreeNode::Activity(label) => f(label),
        TreeNode::Silent => {}
        TreeNode::Seq(cs) | TreeNode::And(cs) => {
            for c in cs {
                walk_leaves(c, f);
            }
        }
        TreeNode::Xor { children, .. } | TreeNode::Or { children, .. } => {
            for c in children {
                walk_leaves(c, f);
            }
        }
        TreeNode::Loop { body, redo, .. } => {
            walk_leaves(body, f);
            walk_leaves(redo, f);
        }
    }
}

/// Constrains eligible sequentially ordered XOR pairs with probability
/// `p_ltdep` each, keeping every XOR in at most one dependency.
fn add_dependencies(root: TreeNode, p_ltdep: f64, rng: &mut impl Rng) -> ProcessTree {
    let tree = ProcessTree { root, ltdeps: vec![] };
    if p_ltdep <= 0.0 {
        return tree;
    }
    let xors = tree.mandatory_xors();
    let mut arity = std::collections::BTreeMap::new();
    tree.for_each_node(|id, n| {
        if let TreeNode::Xor { children, .. } = n {
            arity.insert(id, children.len());
        }
    });
    let mut used: Vec<usize> = Vec::new();
    let mut deps = Vec::new();
    for &s in &xors {
        for &t in &xors {
            if used.contains(&s) || used.contains(&t) || !tree.seq_ordered(s, t) {
                continue;
            }
            if rng.random_bool(p_ltdep) {
                deps.push(LongTermDep {
                    source: (s, rng.random_range(0..arity[&s])),
                    target: (t, rng.random_range(0..arity[&t])),
                });
                used.push(s);
                used.push(t);
            }
        }
    }
    ProcessTree::new(tree.root, deps).expect("generated dependencies are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::rng_from_seed;
    use crate::text::write_tree;

    fn spec(p: [f64; 5], size: (usize, usize, usize)) -> PopulationSpec {
        PopulationSpec {
            size_min: size.0,
            size_mode: size.1,
            size_max: size.2,
            p_seq: p[0],
            p_xor: p[1],
            p_and: p[2],
            p_or: p[3],
            p_loop: p[4],
            p_silent: 0.0,
            p_duplicate: 0.0,
            p_ltdep: 0.0,
            infrequent_paths: false,
        }
    }

    #[test]
    fn normalization_matches_reported_percentages() {
        // Raw draws 0.95 / 0.74 / 0.40 for sequence, choice and parallel
        // normalize to roughly 46%, 35% and 19%.
        let n = normalize_construct_probs([0.95, 0.74, 0.40, 0.0, 0.0]).unwrap();
        assert!((n[0] - 0.454).abs() < 0.005, "{}", n[0]);
        assert!((n[1] - 0.354).abs() < 0.005, "{}", n[1]);
        assert!((n[2] - 0.191).abs() < 0.005, "{}", n[2]);
        assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_is_identity_on_distributions() {
        let n = normalize_construct_probs([0.2, 0.3, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(n, [0.2, 0.3, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn all_zero_rejected() {
        assert_eq!(
            normalize_construct_probs([0.0; 5]),
            Err(PopulationError::AllZero)
        );
    }

    #[test]
    fn degenerate_size_is_constant() {
        let s = spec([1.0, 0.0, 0.0, 0.0, 0.0], (10, 10, 10));
        let mut rng = rng_from_seed(1);
        for _ in 0..50 {
            assert_eq!(sample_size(&s, &mut rng), 10);
        }
    }

    #[test]
    fn triangular_mean_matches_analytic_value() {
        // Mean of a triangular(5, 10, 15) is (5 + 10 + 15) / 3 = 10.
        let s = spec([1.0, 0.0, 0.0, 0.0, 0.0], (5, 10, 15));
        let mut rng = rng_from_seed(2);
        let n = 20_000;
        let mean: f64 = (0..n).map(|_| sample_size(&s, &mut rng) as f64).sum::<f64>() / n as f64;
        assert!((mean - 10.0).abs() < 0.3, "mean {mean}");
    }

    #[test]
    fn sizes_stay_in_bounds() {
        let s = spec([0.4, 0.3, 0.2, 0.05, 0.05], (3, 6, 12));
        let mut rng = rng_from_seed(3);
        for _ in 0..300 {
            let t = generate_tree(&s, &mut rng);
            let v = t.visible_activity_count();
            assert!((3..=12).contains(&v), "visible count {v}");
            assert!(t.validate().is_ok());
        }
    }

    #[test]
    fn pure_sequence_tree_has_singleton_language() {
        let s = spec([1.0, 0.0, 0.0, 0.0, 0.0], (3, 3, 3));
        let mut rng = rng_from_seed(4);
        let t = generate_tree(&s, &mut rng);
        let lang = crate::language::tree_language_bounded(&t, 2, 100);
        assert_eq!(lang.traces.len(), 1);
        assert_eq!(lang.traces.iter().next().unwrap().len(), 3);
        assert!(!lang.truncated);
    }

    #[test]
    fn construct_frequencies_track_the_spec() {
        let s = spec([0.3, 0.3, 0.2, 0.1, 0.1], (8, 10, 12));
        let mut rng = rng_from_seed(5);
        let mut counts = [0usize; 5];
        let mut total = 0usize;
        while total < 20_000 {
            let t = generate_tree(&s, &mut rng);
            t.for_each_node(|_, n| {
                let slot = match n {
                    TreeNode::Seq(_) => Some(0),
                    TreeNode::Xor { .. } => Some(1),
                    TreeNode::And(_) => Some(2),
                    TreeNode::Or { .. } => Some(3),
                    TreeNode::Loop { .. } => Some(4),
                    _ => None,
                };
                if let Some(i) = slot {
                    counts[i] += 1;
                    total += 1;
                }
            });
        }
        let expected = [0.3, 0.3, 0.2, 0.1, 0.1];
        for i in 0..5 {
            let freq = counts[i] as f64 / total as f64;
            assert!(
                (freq - expected[i]).abs() < 0.02,
                "operator {i}: {freq} vs {}",
                expected[i]
            );
        }
    }

    #[test]
    fn duplicate_rate_is_calibrated() {
        let mut s = spec([0.5, 0.3, 0.2, 0.0, 0.0], (10, 10, 10));
        s.p_duplicate = 0.2;
        let mut rng = rng_from_seed(6);
        let mut leaves = 0usize;
        let mut distinct = 0usize;
        while leaves < 10_000 {
            let t = generate_tree(&s, &mut rng);
            leaves += t.visible_activity_count();
            distinct += t.alphabet().len();
        }
        let dup_rate = (leaves - distinct) as f64 / leaves as f64;
        assert!((dup_rate - 0.2).abs() < 0.02, "duplicate rate {dup_rate}");
    }

    #[test]
    fn zero_duplicate_probability_gives_distinct_labels() {
        let s = spec([0.4, 0.3, 0.3, 0.0, 0.0], (6, 8, 10));
        let mut rng = rng_from_seed(7);
        for _ in 0..100 {
            let t = generate_tree(&s, &mut rng);
            assert_eq!(t.alphabet().len(), t.visible_activity_count());
        }
    }

    #[test]
    fn silent_probability_one_puts_tau_on_every_xor() {
        let mut s = spec([0.3, 0.7, 0.0, 0.0, 0.0], (5, 8, 10));
        s.p_silent = 1.0;
        let mut rng = rng_from_seed(8);
        for _ in 0..50 {
            let t = generate_tree(&s, &mut rng);
            let sampled = t.visible_activity_count();
            assert!((5..=10).contains(&sampled));
            t.for_each_node(|_, n| {
                if let TreeNode::Xor { children, .. } = n {
                    let taus = children.iter().filter(|c| matches!(c, TreeNode::Silent)).count();
                    assert_eq!(taus, 1, "every xor carries exactly one tau branch");
                }
            });
        }
    }

    #[test]
    fn infrequent_paths_skew_binary_choices() {
        let mut s = spec([0.3, 0.7, 0.0, 0.0, 0.0], (5, 8, 10));
        s.infrequent_paths = true;
        let mut rng = rng_from_seed(9);
        for _ in 0..50 {
            let t = generate_tree(&s, &mut rng);
            t.for_each_node(|_, n| {
                if let TreeNode::Xor { weights, .. } = n {
                    let max = weights.iter().cloned().fold(0.0, f64::max);
                    if weights.len() == 2 {
                        assert!(max >= 0.75, "dominant weight {max}");
                    }
                    assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                }
            });
        }
    }

    #[test]
    fn dependencies_appear_and_validate() {
        let mut s = spec([0.5, 0.5, 0.0, 0.0, 0.0], (8, 10, 12));
        s.p_ltdep = 1.0;
        let mut rng = rng_from_seed(10);
        let mut saw_dep = false;
        for _ in 0..100 {
            let t = generate_tree(&s, &mut rng);
            assert!(t.validate().is_ok());
            saw_dep |= !t.ltdeps.is_empty();
        }
        assert!(saw_dep, "eligible pairs should occur in 100 trees");
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let s = spec([0.4, 0.3, 0.2, 0.05, 0.05], (5, 8, 10));
        let a = sample_models(&s, 10, 42).unwrap();
        let b = sample_models(&s, 10, 42).unwrap();
        let at: Vec<String> = a.iter().map(|t| write_tree(t).unwrap()).collect();
        let bt: Vec<String> = b.iter().map(|t| write_tree(t).unwrap()).collect();
        assert_eq!(at, bt);
        let c = sample_models(&s, 10, 43).unwrap();
        let ct: Vec<String> = c.iter().map(|t| write_tree(t).unwrap()).collect();
        assert_ne!(at, ct);
    }

    #[test]
    fn zero_models_rejected() {
        let s = spec([1.0, 0.0, 0.0, 0.0, 0.0], (3, 3, 3));
        assert_eq!(sample_models(&s, 0, 1), Err(PopulationError::BadCount(0)));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = spec([1.0, 0.0, 0.0, 0.0, 0.0], (5, 4, 6));
        assert!(matches!(s.validate(), Err(PopulationError::BadSizes(5, 4, 6))));
        s.size_mode = 5;
        s.p_duplicate = 1.5;
        assert!(matches!(
            s.validate(),
            Err(PopulationError::BadProbability("p_duplicate", _))
        ));
    }
}
