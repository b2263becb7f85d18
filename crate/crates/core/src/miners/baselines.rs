//! Reference points for the discrimination experiments.
//!
//! The flower model accepts every trace over the log's alphabet, trading
//! all precision for perfect recall. The trace model enumerates the log's
//! variants verbatim, trading generalization for exactness: it accepts a
//! trace if and only if the trace is a variant of the training log.

use crate::compile::compile_tree_to_net;
use crate::miners::MinerError;
use crate::petri::{NetBuilder, PetriNet};
use crate::tree::build::{act, seq, tau};
use crate::tree::{ProcessTree, TreeNode};
use std::collections::BTreeMap;

/// One looping place between a start and an end, with one self-loop
/// transition per activity.
pub fn flower_net(traces: &[Vec<String>]) -> Result<PetriNet, MinerError> {
    if traces.is_empty() {
        return Err(MinerError::Failure("empty log".into()));
    }
    let mut alphabet: Vec<&String> = traces.iter().flatten().collect();
    alphabet.sort();
    alphabet.dedup();
    let mut b = NetBuilder::new();
    let start = b.add_place();
    let center = b.add_place();
    let end = b.add_place();
    b.add_transition(None, vec![start], vec![center]);
    b.add_transition(None, vec![center], vec![end]);
    for a in alphabet {
        b.add_transition(Some(a), vec![center], vec![center]);
    }
    Ok(b.build(&[start], &[end]))
}

/// One choice branch per distinct variant, weighted by frequency.
pub fn tracelog_tree(traces: &[Vec<String>]) -> Result<ProcessTree, MinerError> {
    if traces.is_empty() {
        return Err(MinerError::Failure("empty log".into()));
    }
    let mut variants: BTreeMap<&Vec<String>, usize> = BTreeMap::new();
    for t in traces {
        *variants.entry(t).or_insert(0) += 1;
    }
    let mut children = Vec::new();
    let mut weights = Vec::new();
    for (v, count) in variants {
        children.push(branch(v));
        weights.push(count as f64);
    }
    let root = if children.len() == 1 {
        children.pop().expect("one variant")
    } else {
        TreeNode::Xor { children, weights }
    };
    ProcessTree::new(root, vec![]).map_err(|e| MinerError::Failure(e.to_string()))
}

fn branch(variant: &[String]) -> TreeNode {
    match variant.len() {
        0 => tau(),
        1 => act(&variant[0]),
        _ => seq(variant.iter().map(|e| act(e)).collect()),
    }
}

pub fn tracelog_net(traces: &[Vec<String>]) -> Result<PetriNet, MinerError> {
    let tree = tracelog_tree(traces)?;
    compile_tree_to_net(&tree).map_err(|e| MinerError::Failure(e.to_string()))
}
