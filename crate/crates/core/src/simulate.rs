//! Stochastic simulation of traces from a process tree.
//!
//! Each trace is produced in two stages. First the tree's choices are
//! resolved into a run: XOR branches are drawn by weight (or forced by an
//! activated long-term dependency), OR nodes draw a nonempty weighted subset
//! of branches, and loops redo with probability `1 - exit_prob` up to a cap
//! of 10 redos. Second the run, a nesting of sequential and parallel blocks
//! over activity leaves, is linearized by repeatedly emitting one leaf
//! chosen uniformly among all currently ready leaves.
//!
//! OR branch inclusion uses p_i = w_i * k / (2 * sum(w)), clamped to
//! [0.05, 0.95], so uniform weights include each branch with probability
//! one half and every branch always has some chance either way.

use crate::language::tree_language_bounded;
use crate::log::{EventLog, Provenance, Trace};
use crate::tree::{NodeId, ProcessTree, TreeNode};
use rand::Rng;
use std::collections::{BTreeMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("bounded language is empty, nothing to compare against")]
    EmptyLanguage,
}

/// Most redo iterations a single loop node takes in one run.
pub const MAX_LOOP_REDOS: usize = 10;

/// One fully resolved run: sequential and parallel blocks over labels.
enum RunNode {
    Leaf(String),
    Seq(VecDeque<RunNode>),
    Par(Vec<RunNode>),
}

impl RunNode {
    fn frontier(&self) -> usize {
        match self {
            RunNode::Leaf(_) => 1,
            RunNode::Seq(cs) => cs.front().map_or(0, RunNode::frontier),
            RunNode::Par(cs) => cs.iter().map(RunNode::frontier).sum(),
        }
    }

    /// Removes the `idx`-th ready leaf; true means this node is exhausted.
    fn take(&mut self, idx: usize, out: &mut Vec<String>) -> bool {
        match self {
            RunNode::Leaf(l) => {
                out.push(std::mem::take(l));
                true
            }
            RunNode::Seq(cs) => {
                if cs.front_mut().expect("frontier nonempty").take(idx, out) {
                    cs.pop_front();
                }
                cs.is_empty()
            }
            RunNode::Par(cs) => {
                let mut i = idx;
                for j in 0..cs.len() {
                    let f = cs[j].frontier();
                    if i < f {
                        if cs[j].take(i, out) {
                            cs.remove(j);
                        }
                        return cs.is_empty();
                    }
                    i -= f;
                }
                unreachable!("frontier index in range")
            }
        }
    }
}

/// Seq block from already-built parts, dropping empties.
fn seq_of(parts: Vec<Option<RunNode>>) -> Option<RunNode> {
    let mut kept: VecDeque<RunNode> = parts.into_iter().flatten().collect();
    match kept.len() {
        0 => None,
        1 => kept.pop_front(),
        _ => Some(RunNode::Seq(kept)),
    }
}

fn par_of(parts: Vec<Option<RunNode>>) -> Option<RunNode> {
    let mut kept: Vec<RunNode> = parts.into_iter().flatten().collect();
    match kept.len() {
        0 => None,
        1 => kept.pop(),
        _ => Some(RunNode::Par(kept)),
    }
}

struct Resolver<'a> {
    // Source (xor id, branch) -> forced (target id, branch).
    deps: BTreeMap<(NodeId, usize), (NodeId, usize)>,
    forced: BTreeMap<NodeId, usize>,
    rng: &'a mut dyn rand::RngCore,
}

impl Resolver<'_> {
    /// Builds the run for `node`, whose preorder id is `id`.
    fn build(&mut self, node: &TreeNode, id: NodeId) -> Option<RunNode> {
        match node {
            TreeNode::Activity(l) => Some(RunNode::Leaf(l.clone())),
            TreeNode::Silent => None,
            TreeNode::Seq(cs) => {
                let mut cid = id + 1;
                let parts = cs
                    .iter()
                    .map(|c| {
                        let r = self.build(c, cid);
                        cid += c.node_count();
                        r
                    })
                    .collect();
                seq_of(parts)
            }
            TreeNode::And(cs) => {
                let mut cid = id + 1;
                let parts = cs
                    .iter()
                    .map(|c| {
                        let r = self.build(c, cid);
                        cid += c.node_count();
                        r
                    })
                    .collect();
                par_of(parts)
            }
            TreeNode::Xor { children, weights } => {
                let pick = match self.forced.remove(&id) {
                    Some(b) => b,
                    None => weighted_index(weights, self.rng),
                };
                if let Some(&(t, tb)) = self.deps.get(&(id, pick)) {
                    self.forced.insert(t, tb);
                }
                let mut cid = id + 1;
                for c in &children[..pick] {
                    cid += c.node_count();
                }
                self.build(&children[pick], cid)
            }
            TreeNode::Or { children, weights } => {
                let included = or_subset(weights, self.rng);
                let mut cid = id + 1;
                let parts = children
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let r = if included[i] { self.build(c, cid) } else { None };
                        cid += c.node_count();
                        r
                    })
                    .collect();
                par_of(parts)
            }
            TreeNode::Loop { body, redo, exit_prob } => {
                let body_id = id + 1;
                let redo_id = body_id + body.node_count();
                let mut parts = vec![self.build(body, body_id)];
                let mut redos = 0;
                while redos < MAX_LOOP_REDOS && self.rng.random_bool(1.0 - *exit_prob) {
                    parts.push(self.build(redo, redo_id));
                    parts.push(self.build(body, body_id));
                    redos += 1;
                }
                seq_of(parts)
            }
        }
    }
}

fn weighted_index(weights: &[f64], rng: &mut dyn rand::RngCore) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u: f64 = rng.random_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Nonempty subset of OR branches; each included independently, resampled
/// until at least one branch made it in.
fn or_subset(weights: &[f64], rng: &mut dyn rand::RngCore) -> Vec<bool> {
    let k = weights.len() as f64;
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights
        .iter()
        .map(|w| (w * k / (2.0 * total)).clamp(0.05, 0.95))
        .collect();
    loop {
        let included: Vec<bool> = probs.iter().map(|&p| rng.random_bool(p)).collect();
        if included.iter().any(|&b| b) {
            return included;
        }
    }
}

/// Draws one trace from the tree's stochastic semantics.
pub fn simulate_trace(tree: &ProcessTree, rng: &mut impl Rng) -> Vec<String> {
    let deps = tree
        .ltdeps
        .iter()
        .map(|d| (d.source, d.target))
        .collect();
    let mut resolver = Resolver { deps, forced: BTreeMap::new(), rng };
    let mut run = resolver.build(&tree.root, 0);
    let mut out = Vec::new();
    while let Some(r) = run.as_mut() {
        let f = r.frontier();
        if f == 0 {
            break;
        }
        let idx = resolver.rng.random_range(0..f as u64) as usize;
        if r.take(idx, &mut out) {
            run = None;
        }
    }
    out
}

/// Simulates `n` traces, tagged as fitting and numbered by case id.
pub fn simulate_log(tree: &ProcessTree, n: usize, rng: &mut impl Rng) -> EventLog {
    let traces = (0..n)
        .map(|i| Trace {
            case_id: format!("c{i}"),
            provenance: Provenance::Fitting,
            events: simulate_trace(tree, rng),
        })
        .collect();
    EventLog { traces }
}

/// Share of the tree's bounded language covered by the log's variants.
#[derive(Debug, Clone, PartialEq)]
pub struct Completeness {
    pub fraction: f64,
    pub language_size: usize,
    pub matched: usize,
    /// The language enumeration hit a loop or a cap; the fraction is
    /// relative to the enumerated portion only.
    pub truncated: bool,
}

pub fn log_completeness(
    log: &EventLog,
    tree: &ProcessTree,
    max_loop_unroll: usize,
    max_traces: usize,
) -> Result<Completeness, SimError> {
    let lang = tree_language_bounded(tree, max_loop_unroll, max_traces);
    if lang.traces.is_empty() {
        return Err(SimError::EmptyLanguage);
    }
    let variants = log.variants();
    let matched = lang
        .traces
        .iter()
        .filter(|t| variants.contains_key(*t))
        .count();
    Ok(Completeness {
        fraction: matched as f64 / lang.traces.len() as f64,
        language_size: lang.traces.len(),
        matched,
        truncated: lang.truncated,
    })
}
