//! Recursive discovery of a process tree by cutting the directly-follows
//! graph.
//!
//! Each recursion step strips empty traces into a silent alternative, takes
//! a single repeated activity as a leaf, and otherwise tries four cuts in
//! order: exclusive choice (weakly connected components), sequence
//! (incomparable strongly connected components merged, then totally
//! ordered), parallel (components after removing mutual-follows edges, each
//! holding a start and an end), and loop (start/end activities as the body,
//! connecting components as redos). The log is projected onto each part and
//! mined recursively. When no cut applies the step falls back to a flower
//! over the remaining activities, which accepts any ordering of them.

use crate::compile::compile_tree_to_net;
use crate::dfg::Dfg;
use crate::miners::MinerError;
use crate::petri::PetriNet;
use crate::tree::build::{act, loop_, tau, xor};
use crate::tree::{ProcessTree, TreeNode};
use std::collections::BTreeSet;

pub fn inductive_tree(traces: &[Vec<String>]) -> Result<ProcessTree, MinerError> {
    if traces.is_empty() {
        return Err(MinerError::Failure("empty log".into()));
    }
    if traces.iter().all(|t| t.is_empty()) {
        return Err(MinerError::Failure("log has no events".into()));
    }
    let root = im(traces.to_vec());
    ProcessTree::new(root, vec![]).map_err(|e| MinerError::Failure(e.to_string()))
}

pub fn inductive_net(traces: &[Vec<String>]) -> Result<PetriNet, MinerError> {
    let tree = inductive_tree(traces)?;
    compile_tree_to_net(&tree).map_err(|e| MinerError::Failure(e.to_string()))
}

fn im(log: Vec<Vec<String>>) -> TreeNode {
    if log.iter().any(|t| t.is_empty()) {
        let rest: Vec<Vec<String>> = log.into_iter().filter(|t| !t.is_empty()).collect();
        if rest.is_empty() {
            return TreeNode::Silent;
        }
        return xor(vec![tau(), im(rest)]);
    }
    let dfg = Dfg::from_traces(&log);
    if dfg.activities.len() == 1 && log.iter().all(|t| t.len() == 1) {
        return TreeNode::Activity(dfg.activities[0].clone());
    }
    if let Some(parts) = xor_cut(&dfg) {
        let children = project_exclusive(&log, &dfg, &parts).into_iter().map(im).collect();
        return xor(children);
    }
    if let Some(groups) = seq_cut(&dfg) {
        let children = project_filtering(&log, &dfg, &groups).into_iter().map(im).collect();
        return TreeNode::Seq(children);
    }
    if let Some(parts) = par_cut(&dfg) {
        let children = project_filtering(&log, &dfg, &parts).into_iter().map(im).collect();
        return TreeNode::And(children);
    }
    if let Some(body) = loop_cut(&dfg) {
        let (body_log, redo_log) = project_loop(&log, &dfg, &body);
        return loop_(im(body_log), im(redo_log), 0.5);
    }
    flower(&dfg.activities)
}

/// Any ordering of the given activities, any number of times, or nothing.
fn flower(activities: &[String]) -> TreeNode {
    let redo = if activities.len() == 1 {
        act(&activities[0])
    } else {
        xor(activities.iter().map(|a| act(a)).collect())
    };
    loop_(tau(), redo, 0.5)
}

/// Connected components under the adjacency closure, ordered by smallest
/// member.
#[allow(clippy::needless_range_loop)]
fn components(n: usize, adjacent: impl Fn(usize, usize) -> bool) -> Vec<BTreeSet<usize>> {
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut queue = vec![root];
        seen[root] = true;
        while let Some(a) = queue.pop() {
            comp.insert(a);
            for b in 0..n {
                if !seen[b] && (adjacent(a, b) || adjacent(b, a)) {
                    seen[b] = true;
                    queue.push(b);
                }
            }
        }
        comps.push(comp);
    }
    comps
}

fn xor_cut(dfg: &Dfg) -> Option<Vec<BTreeSet<usize>>> {
    let n = dfg.activities.len();
    let comps = components(n, |a, b| dfg.directly_follows(a, b));
    (comps.len() >= 2).then_some(comps)
}

/// Strict reachability over the follows graph as bitmasks.
fn closure(dfg: &Dfg) -> Vec<u64> {
    let n = dfg.activities.len();
    debug_assert!(n <= 64);
    let mut reach: Vec<u64> = (0..n)
        .map(|a| (0..n).filter(|&b| dfg.directly_follows(a, b)).fold(0u64, |m, b| m | 1 << b))
        .collect();
    for k in 0..n {
        for a in 0..n {
            if reach[a] & (1 << k) != 0 {
                reach[a] |= reach[k];
            }
        }
    }
    reach
}

fn seq_cut(dfg: &Dfg) -> Option<Vec<BTreeSet<usize>>> {
    let n = dfg.activities.len();
    if n > 64 {
        return None;
    }
    let reach = closure(dfg);
    // Activities that are mutually reachable or mutually unreachable share
    // a group; union-find keeps the merge transitive.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for a in 0..n {
        for b in a + 1..n {
            let fwd = reach[a] & (1 << b) != 0;
            let back = reach[b] & (1 << a) != 0;
            if fwd == back {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: Vec<BTreeSet<usize>> = Vec::new();
    let mut root_of: std::collections::BTreeMap<usize, usize> = Default::default();
    for a in 0..n {
        let r = find(&mut parent, a);
        let idx = *root_of.entry(r).or_insert_with(|| {
            groups.push(BTreeSet::new());
            groups.len() - 1
        });
        groups[idx].insert(a);
    }
    if groups.len() < 2 {
        return None;
    }
    // Every activity pair across two groups must be ordered the same way.
    let order = |x: &BTreeSet<usize>, y: &BTreeSet<usize>| {
        x.iter().all(|&a| {
            y.iter()
                .all(|&b| reach[a] & (1 << b) != 0 && reach[b] & (1 << a) == 0)
        })
    };
    let mut keyed: Vec<(usize, BTreeSet<usize>)> = Vec::new();
    for g in &groups {
        let mut before_me = 0;
        for h in &groups {
            if h == g {
                continue;
            }
            if order(h, g) {
                before_me += 1;
            } else if !order(g, h) {
                return None;
            }
        }
        keyed.push((before_me, g.clone()));
    }
    keyed.sort();
    Some(keyed.into_iter().map(|(_, g)| g).collect())
}

fn par_cut(dfg: &Dfg) -> Option<Vec<BTreeSet<usize>>> {
    let n = dfg.activities.len();
    let comps = components(n, |a, b| a != b && !(dfg.parallel(a, b)));
    if comps.len() < 2 {
        return None;
    }
    let grounded = comps
        .iter()
        .all(|c| c.iter().any(|a| dfg.starts.contains(a)) && c.iter().any(|a| dfg.ends.contains(a)));
    (grounded).then_some(comps)
}

/// Finds the body of a loop cut: all starts and ends, plus any component
/// that re-enters the body elsewhere than a start or leaves it elsewhere
/// than an end. The remaining components redo the loop.
fn loop_cut(dfg: &Dfg) -> Option<BTreeSet<usize>> {
    let n = dfg.activities.len();
    let seed: BTreeSet<usize> = dfg.starts.union(&dfg.ends).copied().collect();
    if seed.len() == n {
        return None;
    }
    let inner: Vec<usize> = (0..n).filter(|a| !seed.contains(a)).collect();
    let comps = components(inner.len(), |x, y| {
        dfg.directly_follows(inner[x], inner[y])
    });
    let mut body = seed.clone();
    let mut redo = BTreeSet::new();
    for comp in comps {
        let members: BTreeSet<usize> = comp.iter().map(|&x| inner[x]).collect();
        let clean = members.iter().all(|&a| {
            seed.iter().all(|&b| {
                (!dfg.directly_follows(a, b) || dfg.starts.contains(&b))
                    && (!dfg.directly_follows(b, a) || dfg.ends.contains(&b))
            })
        });
        if clean {
            redo.extend(members);
        } else {
            body.extend(members);
        }
    }
    (!redo.is_empty()).then_some(body)
}

/// Each trace goes whole to the part owning its activities.
fn project_exclusive(
    log: &[Vec<String>],
    dfg: &Dfg,
    parts: &[BTreeSet<usize>],
) -> Vec<Vec<Vec<String>>> {
    let mut out = vec![Vec::new(); parts.len()];
    for t in log {
        let first = dfg.index_of(&t[0]).expect("activity indexed");
        let p = parts.iter().position(|c| c.contains(&first)).expect("partition");
        out[p].push(t.clone());
    }
    out
}

/// Each trace is filtered down to every part's alphabet.
fn project_filtering(
    log: &[Vec<String>],
    dfg: &Dfg,
    parts: &[BTreeSet<usize>],
) -> Vec<Vec<Vec<String>>> {
    parts
        .iter()
        .map(|part| {
            log.iter()
                .map(|t| {
                    t.iter()
                        .filter(|e| part.contains(&dfg.index_of(e).expect("indexed")))
                        .cloned()
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Maximal runs inside and outside the body alternate; body runs feed the
/// first child log, redo runs the second.
fn project_loop(
    log: &[Vec<String>],
    dfg: &Dfg,
    body: &BTreeSet<usize>,
) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let mut body_log = Vec::new();
    let mut redo_log = Vec::new();
    for t in log {
        let mut run: Vec<String> = Vec::new();
        let mut in_body = true;
        for e in t {
            let inside = body.contains(&dfg.index_of(e).expect("indexed"));
            if inside != in_body {
                if in_body {
                    body_log.push(std::mem::take(&mut run));
                } else {
                    redo_log.push(std::mem::take(&mut run));
                }
                in_body = inside;
            }
            run.push(e.clone());
        }
        if in_body {
            body_log.push(run);
        } else {
            // Trace ends outside the body; close with an empty body run.
            redo_log.push(run);
            body_log.push(Vec::new());
        }
    }
    (body_log, redo_log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replay::{replay_fits, ReplayConfig, ReplayVerdict};
    use crate::text::write_tree;
    use crate::tree::build::{and, seq};

    fn traces(ts: &[&[&str]]) -> Vec<Vec<String>> {
        ts.iter()
            .map(|t| t.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    fn mined(ts: &[&[&str]]) -> String {
        write_tree(&inductive_tree(&traces(ts)).unwrap()).unwrap()
    }

    fn expect(root: TreeNode) -> String {
        write_tree(&ProcessTree::plain(root)).unwrap()
    }

    #[test]
    fn sequence_with_choice_is_rediscovered() {
        assert_eq!(
            mined(&[&["a", "b", "d"], &["a", "c", "d"]]),
            expect(seq(vec![act("a"), xor(vec![act("b"), act("c")]), act("d")]))
        );
    }

    #[test]
    fn interleaving_becomes_parallel() {
        assert_eq!(
            mined(&[&["a", "b"], &["b", "a"]]),
            expect(and(vec![act("a"), act("b")]))
        );
    }

    #[test]
    fn sequence_then_parallel_nests() {
        assert_eq!(
            mined(&[&["a", "b", "c"], &["a", "c", "b"]]),
            expect(seq(vec![act("a"), and(vec![act("b"), act("c")])]))
        );
    }

    #[test]
    fn empty_traces_become_a_silent_branch() {
        assert_eq!(
            mined(&[&["a"], &[]]),
            expect(xor(vec![tau(), act("a")]))
        );
    }

    #[test]
    fn alternation_becomes_a_loop() {
        assert_eq!(
            mined(&[&["a", "b", "a"], &["a"]]),
            expect(loop_(act("a"), act("b"), 0.5))
        );
    }

    #[test]
    fn repeated_single_activity_falls_through_to_a_flower() {
        assert_eq!(
            mined(&[&["a"], &["a", "a"]]),
            expect(loop_(tau(), act("a"), 0.5))
        );
    }

    #[test]
    fn tangled_log_falls_through_to_a_flower() {
        let log = traces(&[&["a", "b", "c"], &["c", "a"], &["b", "b"]]);
        let tree = inductive_tree(&log).unwrap();
        assert_eq!(
            write_tree(&tree).unwrap(),
            expect(loop_(tau(), xor(vec![act("a"), act("b"), act("c")]), 0.5))
        );
        // A flower accepts any ordering over its alphabet.
        let net = inductive_net(&log).unwrap();
        let wild: Vec<String> = ["c", "c", "b", "a"].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            replay_fits(&net, &wild, &ReplayConfig::default()).unwrap(),
            ReplayVerdict::Fits
        );
    }

    #[test]
    fn mined_net_replays_its_own_log() {
        let log = traces(&[
            &["a", "b", "c", "e"],
            &["a", "c", "b", "e"],
            &["a", "d", "e"],
            &["a", "d", "e"],
        ]);
        let net = inductive_net(&log).unwrap();
        let cfg = ReplayConfig::default();
        for t in &log {
            assert_eq!(replay_fits(&net, t, &cfg).unwrap(), ReplayVerdict::Fits, "{t:?}");
        }
    }

    #[test]
    fn degenerate_logs_fail() {
        assert!(inductive_tree(&[]).is_err());
        assert!(inductive_tree(&traces(&[&[], &[]])).is_err());
    }
}
