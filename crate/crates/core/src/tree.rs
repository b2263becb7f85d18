//! Process trees: block-structured process models.
//!
//! A tree composes activity leaves with sequence, exclusive choice, parallel,
//! inclusive choice and loop operators. Exclusive/inclusive choices carry
//! per-branch weights used during simulation; loops carry an exit probability.
//! On top of the block structure, a tree may declare long-term dependencies
//! that couple the branch choices of two sequentially ordered XOR nodes.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use thiserror::Error;

/// Node identifier: the preorder index of the node within its tree.
/// The root is 0, children are numbered depth-first in declaration order,
/// a loop's body before its redo part.
pub type NodeId = usize;

/// A single node of a process tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    /// Visible activity leaf. Executing it emits one event with this label.
    Activity(String),
    /// Silent leaf (tau). Executes without emitting an event.
    Silent,
    /// Sequential composition: children execute left to right.
    Seq(Vec<TreeNode>),
    /// Exclusive choice: exactly one child executes, drawn by weight.
    Xor {
        children: Vec<TreeNode>,
        weights: Vec<f64>,
    },
    /// Parallel composition: all children execute, interleaved.
    And(Vec<TreeNode>),
    /// Inclusive choice: a nonempty subset of children executes, interleaved.
    Or {
        children: Vec<TreeNode>,
        weights: Vec<f64>,
    },
    /// Structured loop: body, then zero or more (redo, body) rounds.
    Loop {
        body: Box<TreeNode>,
        redo: Box<TreeNode>,
        exit_prob: f64,
    },
}

/// Couples two sequentially ordered XOR nodes: whenever the source XOR takes
/// the source branch, the target XOR must take the target branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LongTermDep {
    /// (XOR node id, branch index) whose choice triggers the constraint.
    pub source: (NodeId, usize),
    /// (XOR node id, branch index) forced when the source branch is taken.
    pub target: (NodeId, usize),
}

/// A process tree together with its long-term dependencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessTree {
    pub root: TreeNode,
    pub ltdeps: Vec<LongTermDep>,
}

/// Structural violations rejected by [`ProcessTree::validate`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("operator node {0} has {1} children, needs at least 2")]
    TooFewChildren(NodeId, usize),
    #[error("node {0} has {1} weights for {2} children")]
    WeightArity(NodeId, usize, usize),
    #[error("node {0} has a non-positive weight")]
    NonPositiveWeight(NodeId),
    #[error("node {0} has loop exit probability {1}, must be in (0, 1]")]
    BadExitProb(NodeId, String),
    #[error("tree has no visible activity")]
    NoActivity,
    #[error("dependency references node {0} which is not an XOR node")]
    DepNotXor(NodeId),
    #[error("dependency references branch {1} of node {0}, out of range")]
    DepBranchRange(NodeId, usize),
    #[error("dependency source and target are the same node {0}")]
    DepSelf(NodeId),
    #[error("dependency {0} -> {1} is not sequentially ordered")]
    DepNotSeqOrdered(NodeId, NodeId),
    #[error("two dependencies share the target XOR node {0}")]
    DepSharedTarget(NodeId),
}

impl TreeNode {
    /// Child list of this node; empty for leaves.
    pub fn children(&self) -> &[TreeNode] {
        match self {
            TreeNode::Activity(_) | TreeNode::Silent => &[],
            TreeNode::Seq(cs) | TreeNode::And(cs) => cs,
            TreeNode::Xor { children, .. } | TreeNode::Or { children, .. } => children,
            TreeNode::Loop { .. } => {
                // Loop stores its children boxed; handled via children_vec.
                unreachable!("use children_iter for loops")
            }
        }
    }

    /// Iterator over children that also works for loop nodes.
    pub fn children_iter(&self) -> Box<dyn Iterator<Item = &TreeNode> + '_> {
        match self {
            TreeNode::Activity(_) | TreeNode::Silent => Box::new(std::iter::empty()),
            TreeNode::Seq(cs) | TreeNode::And(cs) => Box::new(cs.iter()),
            TreeNode::Xor { children, .. } | TreeNode::Or { children, .. } => {
                Box::new(children.iter())
            }
            TreeNode::Loop { body, redo, .. } => {
                Box::new(std::iter::once(body.as_ref()).chain(std::iter::once(redo.as_ref())))
            }
        }
    }

    /// Number of nodes in the subtree rooted here.
    pub fn node_count(&self) -> usize {
        1 + self.children_iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Number of visible activity leaves in the subtree.
    pub fn visible_count(&self) -> usize {
        match self {
            TreeNode::Activity(_) => 1,
            _ => self.children_iter().map(|c| c.visible_count()).sum(),
        }
    }
}

impl ProcessTree {
    /// Builds and validates a tree.
    pub fn new(root: TreeNode, ltdeps: Vec<LongTermDep>) -> Result<Self, TreeError> {
        let tree = ProcessTree { root, ltdeps };
        tree.validate()?;
        Ok(tree)
    }

    /// Tree without dependencies; panics on invalid structure (test helper).
    pub fn plain(root: TreeNode) -> Self {
        Self::new(root, Vec::new()).expect("valid tree")
    }

    /// Preorder walk, calling `f` with each node's id.
    pub fn for_each_node<'a>(&'a self, mut f: impl FnMut(NodeId, &'a TreeNode)) {
        fn walk<'a>(node: &'a TreeNode, next: &mut NodeId, f: &mut impl FnMut(NodeId, &'a TreeNode)) {
            let id = *next;
            *next += 1;
            f(id, node);
            match node {
                TreeNode::Loop { body, redo, .. } => {
                    walk(body, next, f);
                    walk(redo, next, f);
                }
                other => {
                    for c in other.children_iter() {
                        walk(c, next, f);
                    }
                }
            }
        }
        let mut next = 0;
        walk(&self.root, &mut next, &mut f);
    }

    /// Node by preorder id, if in range.
    pub fn node(&self, id: NodeId) -> Option<&TreeNode> {
        let mut found = None;
        self.for_each_node(|i, n| {
            if i == id {
                found = Some(n);
            }
        });
        found
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    /// Number of visible activity leaves (duplicate labels counted per leaf).
    pub fn visible_activity_count(&self) -> usize {
        self.root.visible_count()
    }

    /// Distinct visible labels, sorted.
    pub fn alphabet(&self) -> BTreeSet<String> {
        let mut set = BTreeSet::new();
        self.for_each_node(|_, n| {
            if let TreeNode::Activity(a) = n {
                set.insert(a.clone());
            }
        });
        set
    }

    /// Whether any loop node occurs in the tree.
    pub fn has_loop(&self) -> bool {
        let mut found = false;
        self.for_each_node(|_, n| {
            if matches!(n, TreeNode::Loop { .. }) {
                found = true;
            }
        });
        found
    }

    /// Ids of XOR nodes on a mandatory path: every ancestor is Seq or And, so
    /// the node executes exactly once in every run of the tree. Only these can
    /// participate in long-term dependencies.
    pub fn mandatory_xors(&self) -> Vec<NodeId> {
        fn walk(node: &TreeNode, next: &mut NodeId, mandatory: bool, out: &mut Vec<NodeId>) {
            let id = *next;
            *next += 1;
            let child_mandatory = match node {
                TreeNode::Seq(_) | TreeNode::And(_) => mandatory,
                _ => false,
            };
            if mandatory {
                if let TreeNode::Xor { .. } = node {
                    out.push(id);
                }
            }
            match node {
                TreeNode::Loop { body, redo, .. } => {
                    walk(body, next, false, out);
                    walk(redo, next, false, out);
                }
                other => {
                    for c in other.children_iter() {
                        walk(c, next, child_mandatory, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        let mut next = 0;
        walk(&self.root, &mut next, true, &mut out);
        out
    }

    /// True when `source` completes strictly before `target` can start:
    /// both are on mandatory paths and share a Seq ancestor that places the
    /// source subtree in an earlier child than the target subtree.
    pub fn seq_ordered(&self, source: NodeId, target: NodeId) -> bool {
        let mandatory = self.mandatory_xors();
        if !mandatory.contains(&source) || !mandatory.contains(&target) {
            return false;
        }
        // Walk down from the root tracking both ids; at the first Seq where
        // they diverge into different children, compare child positions.
        fn subtree_range(node: &TreeNode, start: NodeId) -> (NodeId, NodeId) {
            (start, start + node.node_count())
        }
        fn find(node: &TreeNode, id_here: NodeId, s: NodeId, t: NodeId) -> bool {
            let mut child_start = id_here + 1;
            let children: Vec<&TreeNode> = node.children_iter().collect();
            let mut s_child = None;
            let mut t_child = None;
            let mut ranges = Vec::new();
            for (ci, c) in children.iter().enumerate() {
                let (lo, hi) = subtree_range(c, child_start);
                ranges.push((ci, lo));
                if (lo..hi).contains(&s) {
                    s_child = Some(ci);
                }
                if (lo..hi).contains(&t) {
                    t_child = Some(ci);
                }
                child_start = hi;
            }
            match (s_child, t_child) {
                (Some(a), Some(b)) if a == b => {
                    let (_, lo) = ranges[a];
                    find(children[a], lo, s, t)
                }
                (Some(a), Some(b)) => matches!(node, TreeNode::Seq(_)) && a < b,
                _ => false,
            }
        }
        source != target && find(&self.root, 0, source, target)
    }

    /// Checks all structural invariants.
    pub fn validate(&self) -> Result<(), TreeError> {
        let mut errs: Vec<TreeError> = Vec::new();
        let mut xor_arity: Vec<(NodeId, usize)> = Vec::new();
        self.for_each_node(|id, n| match n {
            TreeNode::Seq(cs) | TreeNode::And(cs) => {
                if cs.len() < 2 {
                    errs.push(TreeError::TooFewChildren(id, cs.len()));
                }
            }
            TreeNode::Xor { children, weights } | TreeNode::Or { children, weights } => {
                if children.len() < 2 {
                    errs.push(TreeError::TooFewChildren(id, children.len()));
                }
                if weights.len() != children.len() {
                    errs.push(TreeError::WeightArity(id, weights.len(), children.len()));
                }
                // NaN must fail too, so test for Greater instead of > 0.
                if weights.iter().any(|w| w.partial_cmp(&0.0) != Some(Ordering::Greater)) {
                    errs.push(TreeError::NonPositiveWeight(id));
                }
                if let TreeNode::Xor { .. } = n {
                    xor_arity.push((id, children.len()));
                }
            }
            TreeNode::Loop { exit_prob, .. }
                if exit_prob.partial_cmp(&0.0) != Some(Ordering::Greater)
                    || *exit_prob > 1.0 =>
            {
                errs.push(TreeError::BadExitProb(id, format!("{exit_prob}")));
            }
            _ => {}
        });
        if let Some(e) = errs.into_iter().next() {
            return Err(e);
        }
        if self.visible_activity_count() == 0 && !matches!(self.root, TreeNode::Silent) {
            return Err(TreeError::NoActivity);
        }
        let mut seen_targets = BTreeSet::new();
        for dep in &self.ltdeps {
            for &(node, branch) in [&dep.source, &dep.target] {
                match xor_arity.iter().find(|(id, _)| *id == node) {
                    None => return Err(TreeError::DepNotXor(node)),
                    Some((_, arity)) if branch >= *arity => {
                        return Err(TreeError::DepBranchRange(node, branch))
                    }
                    _ => {}
                }
            }
            if dep.source.0 == dep.target.0 {
                return Err(TreeError::DepSelf(dep.source.0));
            }
            if !self.seq_ordered(dep.source.0, dep.target.0) {
                return Err(TreeError::DepNotSeqOrdered(dep.source.0, dep.target.0));
            }
            if !seen_targets.insert(dep.target.0) {
                return Err(TreeError::DepSharedTarget(dep.target.0));
            }
        }
        Ok(())
    }
}

/// Shorthand constructors used across tests and generators.
pub mod build {
    use super::TreeNode;

    pub fn act(label: &str) -> TreeNode {
        TreeNode::Activity(label.to_string())
    }

    pub fn tau() -> TreeNode {
        TreeNode::Silent
    }

    pub fn seq(children: Vec<TreeNode>) -> TreeNode {
        TreeNode::Seq(children)
    }

    pub fn and(children: Vec<TreeNode>) -> TreeNode {
        TreeNode::And(children)
    }

    /// XOR with uniform weights.
    pub fn xor(children: Vec<TreeNode>) -> TreeNode {
        let weights = vec![1.0; children.len()];
        TreeNode::Xor { children, weights }
    }

    pub fn xor_w(children: Vec<TreeNode>, weights: Vec<f64>) -> TreeNode {
        TreeNode::Xor { children, weights }
    }

    /// OR with uniform weights.
    pub fn or(children: Vec<TreeNode>) -> TreeNode {
        let weights = vec![1.0; children.len()];
        TreeNode::Or { children, weights }
    }

    pub fn or_w(children: Vec<TreeNode>, weights: Vec<f64>) -> TreeNode {
        TreeNode::Or { children, weights }
    }

    pub fn loop_(body: TreeNode, redo: TreeNode, exit_prob: f64) -> TreeNode {
        TreeNode::Loop {
            body: Box::new(body),
            redo: Box::new(redo),
            exit_prob,
        }
    }
}
