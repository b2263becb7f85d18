//! Compilation of process trees into Petri nets.
//!
//! Each node becomes a fragment between an entry and an exit place:
//!
//! * activity/silent leaf: one transition
//! * Seq: fragments chained through fresh places
//! * Xor: branches in conflict on the shared entry place; branches of a
//!   dependency-involved Xor get explicit silent entry transitions so the
//!   dependency gadget has a unique transition per branch to hook into
//! * And: silent fork and join transitions
//! * Or: a silent selector picks one mandatory branch, every other branch
//!   independently runs or skips, a silent join collects all branch exits
//! * Loop: body between entry and a decision place, redo wired back to the
//!   entry, silent exit transition leaving the decision place
//!
//! A long-term dependency adds three places. The source Xor's constrained
//! branch entry feeds `dep`, every other source branch feeds `free`; silent
//! drains move either token into `go`. The target Xor's forced branch entry
//! consumes from `go`, every other target branch consumes from `free`, so a
//! `dep` token disables all but the forced branch while a `free` token leaves
//! the choice open. Exactly one token is produced and consumed per run, which
//! keeps the final marking clean. The compiled net accepts precisely the
//! visible traces of the tree.

use crate::petri::{NetBuilder, PetriNet};
use crate::tree::{NodeId, ProcessTree, TreeError, TreeNode};
use std::collections::BTreeMap;

#[derive(Clone, Copy)]
struct DepPlaces {
    dep: usize,
    free: usize,
    go: usize,
}

enum Role {
    Source { branch: usize },
    Target { branch: usize },
}

struct Ctx {
    b: NetBuilder,
    // Xor node id -> gadget hookups for each dependency it participates in.
    hooks: BTreeMap<NodeId, Vec<(DepPlaces, Role)>>,
}

/// Compiles a validated tree into a Petri net whose complete firing
/// sequences project onto exactly the tree's visible traces.
pub fn compile_tree_to_net(tree: &ProcessTree) -> Result<PetriNet, TreeError> {
    tree.validate()?;
    let mut ctx = Ctx {
        b: NetBuilder::new(),
        hooks: BTreeMap::new(),
    };
    for dep in &tree.ltdeps {
        let places = DepPlaces {
            dep: ctx.b.add_place(),
            free: ctx.b.add_place(),
            go: ctx.b.add_place(),
        };
        ctx.b.add_transition(None, vec![places.dep], vec![places.go]);
        ctx.b.add_transition(None, vec![places.free], vec![places.go]);
        ctx.hooks.entry(dep.source.0).or_default().push((
            places,
            Role::Source {
                branch: dep.source.1,
            },
        ));
        ctx.hooks.entry(dep.target.0).or_default().push((
            places,
            Role::Target {
                branch: dep.target.1,
            },
        ));
    }
    let entry = ctx.b.add_place();
    let exit = ctx.b.add_place();
    let mut next_id = 0;
    compile(&tree.root, &mut next_id, entry, exit, &mut ctx);
    let net = ctx.b.build(&[entry], &[exit]);
    debug_assert!(net.validate().is_ok());
    Ok(net)
}

#[allow(clippy::needless_range_loop)]
fn compile(node: &TreeNode, next_id: &mut NodeId, entry: usize, exit: usize, ctx: &mut Ctx) {
    let id = *next_id;
    *next_id += 1;
    match node {
        TreeNode::Activity(a) => {
            let label = a.clone();
            ctx.b.add_transition(Some(&label), vec![entry], vec![exit]);
        }
        TreeNode::Silent => {
            ctx.b.add_transition(None, vec![entry], vec![exit]);
        }
        TreeNode::Seq(children) => {
            let mut at = entry;
            for (i, c) in children.iter().enumerate() {
                let to = if i + 1 == children.len() {
                    exit
                } else {
                    ctx.b.add_place()
                };
                compile(c, next_id, at, to, ctx);
                at = to;
            }
        }
        TreeNode::Xor { children, .. } => {
            let hooks = ctx.hooks.remove(&id);
            match hooks {
                None => {
                    for c in children {
                        compile(c, next_id, entry, exit, ctx);
                    }
                }
                Some(hooks) => {
                    for (bi, c) in children.iter().enumerate() {
                        let branch_entry = ctx.b.add_place();
                        let t = ctx.b.add_transition(None, vec![entry], vec![branch_entry]);
                        for (places, role) in &hooks {
                            match role {
                                Role::Source { branch } => {
                                    let out = if *branch == bi { places.dep } else { places.free };
                                    ctx.b.add_output(t, out);
                                }
                                Role::Target { branch } => {
                                    let input = if *branch == bi { places.go } else { places.free };
                                    ctx.b.add_input(t, input);
                                }
                            }
                        }
                        compile(c, next_id, branch_entry, exit, ctx);
                    }
                }
            }
        }
        TreeNode::And(children) => {
            let entries: Vec<usize> = children.iter().map(|_| ctx.b.add_place()).collect();
            let exits: Vec<usize> = children.iter().map(|_| ctx.b.add_place()).collect();
            ctx.b.add_transition(None, vec![entry], entries.clone());
            ctx.b.add_transition(None, exits.clone(), vec![exit]);
            for (i, c) in children.iter().enumerate() {
                compile(c, next_id, entries[i], exits[i], ctx);
            }
        }
        TreeNode::Or { children, .. } => {
            let k = children.len();
            let entries: Vec<usize> = (0..k).map(|_| ctx.b.add_place()).collect();
            let exits: Vec<usize> = (0..k).map(|_| ctx.b.add_place()).collect();
            let choices: Vec<usize> = (0..k).map(|_| ctx.b.add_place()).collect();
            // One selector per possible mandatory branch d: branch d starts,
            // every other branch gets a run-or-skip token.
            for d in 0..k {
                let mut outs = vec![entries[d]];
                for i in 0..k {
                    if i != d {
                        outs.push(choices[i]);
                    }
                }
                ctx.b.add_transition(None, vec![entry], outs);
            }
            for i in 0..k {
                ctx.b.add_transition(None, vec![choices[i]], vec![entries[i]]);
                ctx.b.add_transition(None, vec![choices[i]], vec![exits[i]]);
            }
            ctx.b.add_transition(None, exits.clone(), vec![exit]);
            for (i, c) in children.iter().enumerate() {
                compile(c, next_id, entries[i], exits[i], ctx);
            }
        }
        TreeNode::Loop { body, redo, .. } => {
            let decision = ctx.b.add_place();
            compile(body, next_id, entry, decision, ctx);
            compile(redo, next_id, decision, entry, ctx);
            ctx.b.add_transition(None, vec![decision], vec![exit]);
        }
    }
}
