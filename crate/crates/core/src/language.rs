//! Bounded enumeration of a tree's visible trace language.
//!
//! Loops are unrolled up to a fixed number of redo rounds and the result set
//! is capped, so enumeration always terminates. For loop-free trees within
//! the cap the result is the exact language. The `truncated` flag reports a
//! lower bound: it is set when a loop could iterate further or the trace cap
//! was hit. Long-term dependencies are honored by tracking the branch choices
//! of the constrained XOR nodes and dropping executions that violate a
//! dependency.

use crate::tree::{NodeId, ProcessTree, TreeNode};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedLanguage {
    pub traces: BTreeSet<Vec<String>>,
    /// True when the enumeration is a lower bound on the real language.
    pub truncated: bool,
}

impl BoundedLanguage {
    pub fn contains(&self, trace: &[String]) -> bool {
        self.traces.contains(trace)
    }
}

/// One execution: interned visible events plus the branch picked at each
/// dependency-tracked XOR node.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Exec {
    ev: Vec<u32>,
    choices: Vec<(NodeId, usize)>,
}

struct Enumerator<'a> {
    labels: Vec<&'a str>,
    label_ids: BTreeMap<&'a str, u32>,
    tracked: BTreeSet<NodeId>,
    max_traces: usize,
    truncated: bool,
}

/// Enumerates visible traces with at most `max_loop_unroll` redo rounds per
/// loop, stopping at `max_traces` distinct traces.
pub fn tree_language_bounded(
    tree: &ProcessTree,
    max_loop_unroll: usize,
    max_traces: usize,
) -> BoundedLanguage {
    let mut tracked = BTreeSet::new();
    for dep in &tree.ltdeps {
        tracked.insert(dep.source.0);
        tracked.insert(dep.target.0);
    }
    let mut en = Enumerator {
        labels: Vec::new(),
        label_ids: BTreeMap::new(),
        tracked,
        max_traces: max_traces.max(1),
        truncated: false,
    };
    let mut next_id = 0;
    let execs = en.enumerate(&tree.root, &mut next_id, max_loop_unroll);
    let mut traces = BTreeSet::new();
    'outer: for e in execs {
        for dep in &tree.ltdeps {
            let src_taken = e.choices.contains(&(dep.source.0, dep.source.1));
            let tgt_taken = e.choices.contains(&(dep.target.0, dep.target.1));
            if src_taken && !tgt_taken {
                continue 'outer;
            }
        }
        traces.insert(e.ev.iter().map(|&i| en.labels[i as usize].to_string()).collect());
    }
    BoundedLanguage {
        traces,
        truncated: en.truncated,
    }
}

impl<'a> Enumerator<'a> {
    fn intern(&mut self, label: &'a str) -> u32 {
        if let Some(&id) = self.label_ids.get(label) {
            return id;
        }
        let id = self.labels.len() as u32;
        self.labels.push(label);
        self.label_ids.insert(label, id);
        id
    }

    /// Deduplicated executions of `node`; `next_id` threads preorder ids.
    fn enumerate(&mut self, node: &'a TreeNode, next_id: &mut NodeId, unroll: usize) -> Vec<Exec> {
        let id = *next_id;
        *next_id += 1;
        let out = match node {
            TreeNode::Activity(a) => {
                let l = self.intern(a);
                vec![Exec {
                    ev: vec![l],
                    choices: vec![],
                }]
            }
            TreeNode::Silent => vec![Exec {
                ev: vec![],
                choices: vec![],
            }],
            TreeNode::Seq(children) => {
                let mut acc = vec![Exec {
                    ev: vec![],
                    choices: vec![],
                }];
                for c in children {
                    let cs = self.enumerate(c, next_id, unroll);
                    acc = self.concat_product(&acc, &cs);
                }
                acc
            }
            TreeNode::Xor { children, .. } => {
                let tracked = self.tracked.contains(&id);
                let mut acc = Vec::new();
                for (bi, c) in children.iter().enumerate() {
                    let mut cs = self.enumerate(c, next_id, unroll);
                    if tracked {
                        for e in &mut cs {
                            e.choices.push((id, bi));
                            e.choices.sort_unstable();
                        }
                    }
                    for e in cs {
                        if acc.len() >= self.max_traces {
                            self.truncated = true;
                            break;
                        }
                        acc.push(e);
                    }
                }
                acc
            }
            TreeNode::And(children) => {
                let mut acc = vec![Exec {
                    ev: vec![],
                    choices: vec![],
                }];
                for c in children {
                    let cs = self.enumerate(c, next_id, unroll);
                    acc = self.shuffle_product(&acc, &cs);
                }
                acc
            }
            TreeNode::Or { children, .. } => {
                let k = children.len();
                let per_child: Vec<Vec<Exec>> =
                    children.iter().map(|c| self.enumerate(c, next_id, unroll)).collect();
                let mut acc = Vec::new();
                for subset in 1u32..(1 << k) {
                    let mut part = vec![Exec {
                        ev: vec![],
                        choices: vec![],
                    }];
                    for (i, cs) in per_child.iter().enumerate() {
                        if subset & (1 << i) != 0 {
                            part = self.shuffle_product(&part, cs);
                        }
                    }
                    for e in part {
                        if acc.len() >= self.max_traces {
                            self.truncated = true;
                            break;
                        }
                        acc.push(e);
                    }
                }
                acc
            }
            TreeNode::Loop { body, redo, .. } => {
                // body (redo body)^j for j = 0..=unroll; more rounds always
                // exist, so a loop node marks the result as truncated.
                self.truncated = true;
                let bodies = self.enumerate(body, next_id, unroll);
                let redos = self.enumerate(redo, next_id, unroll);
                let mut acc = bodies.clone();
                let mut chain = bodies.clone();
                for _ in 0..unroll {
                    chain = self.concat_product(&chain, &redos);
                    chain = self.concat_product(&chain, &bodies);
                    for e in &chain {
                        if acc.len() >= self.max_traces {
                            self.truncated = true;
                            break;
                        }
                        acc.push(e.clone());
                    }
                }
                acc
            }
        };
        dedup(out)
    }

    fn concat_product(&mut self, xs: &[Exec], ys: &[Exec]) -> Vec<Exec> {
        let mut out = Vec::new();
        'outer: for x in xs {
            for y in ys {
                if out.len() >= self.max_traces {
                    self.truncated = true;
                    break 'outer;
                }
                let mut ev = x.ev.clone();
                ev.extend_from_slice(&y.ev);
                out.push(Exec {
                    ev,
                    choices: merge_choices(&x.choices, &y.choices),
                });
            }
        }
        dedup(out)
    }

    fn shuffle_product(&mut self, xs: &[Exec], ys: &[Exec]) -> Vec<Exec> {
        let mut out = Vec::new();
        'outer: for x in xs {
            for y in ys {
                let choices = merge_choices(&x.choices, &y.choices);
                let mut merges = Vec::new();
                let mut prefix = Vec::with_capacity(x.ev.len() + y.ev.len());
                let budget = self.max_traces.saturating_sub(out.len());
                interleave(&x.ev, &y.ev, &mut prefix, &mut merges, budget);
                if merges.len() >= budget {
                    self.truncated = true;
                }
                for ev in merges {
                    if out.len() >= self.max_traces {
                        self.truncated = true;
                        break 'outer;
                    }
                    out.push(Exec {
                        ev,
                        choices: choices.clone(),
                    });
                }
            }
        }
        dedup(out)
    }
}

fn merge_choices(a: &[(NodeId, usize)], b: &[(NodeId, usize)]) -> Vec<(NodeId, usize)> {
    let mut out = a.to_vec();
    out.extend_from_slice(b);
    out.sort_unstable();
    out
}

/// All order-preserving merges of `u` and `v`, at most `budget` of them.
fn interleave(u: &[u32], v: &[u32], prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>, budget: usize) {
    if out.len() >= budget {
        return;
    }
    if u.is_empty() {
        let mut t = prefix.clone();
        t.extend_from_slice(v);
        out.push(t);
        return;
    }
    if v.is_empty() {
        let mut t = prefix.clone();
        t.extend_from_slice(u);
        out.push(t);
        return;
    }
    prefix.push(u[0]);
    interleave(&u[1..], v, prefix, out, budget);
    prefix.pop();
    prefix.push(v[0]);
    interleave(u, &v[1..], prefix, out, budget);
    prefix.pop();
}

fn dedup(execs: Vec<Exec>) -> Vec<Exec> {
    let set: BTreeSet<Exec> = execs.into_iter().collect();
    set.into_iter().collect()
}
