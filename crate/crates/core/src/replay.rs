//! Exact trace replay on Petri nets.
//!
//! A trace fits a net when some firing sequence from the initial marking
//! reaches the final marking exactly and its visible labels spell the trace.
//! The search walks (marking, trace position) states depth-first: silent
//! transitions advance the marking only, a visible transition is followed
//! only when its label matches the next trace event. Duplicate labels are
//! handled existentially by branching over every matching transition.
//! Visited states are memoized. Two caps keep the search finite on adversarial
//! nets: markings with more than `token_bound` tokens on a place are pruned,
//! and exceeding `state_budget` visited states yields `BudgetExceeded`.
//! A verdict reached under some budget is stable under any larger budget.

use crate::petri::{NetError, PetriNet};
use std::collections::HashSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayVerdict {
    Fits,
    NotFits,
    /// Search gave up; callers count the trace as not fitting but keep the
    /// tally separate.
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy)]
pub struct ReplayConfig {
    /// Maximum number of distinct (marking, position) states to visit.
    pub state_budget: usize,
    /// Maximum tokens per place; successors exceeding it are pruned.
    pub token_bound: u8,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        ReplayConfig {
            state_budget: 200_000,
            token_bound: 8,
        }
    }
}

/// Decides whether `trace` (a sequence of labels) fits `net`.
pub fn replay_fits(
    net: &PetriNet,
    trace: &[String],
    cfg: &ReplayConfig,
) -> Result<ReplayVerdict, NetError> {
    net.validate()?;
    // An event whose label no transition carries can never be produced.
    let mut events = Vec::with_capacity(trace.len());
    for e in trace {
        match net.label_id(e) {
            Some(id) => events.push(id),
            None => return Ok(ReplayVerdict::NotFits),
        }
    }
    let (by_label, silent) = net.transition_index();
    let n = events.len();

    let mut visited: HashSet<(Box<[u8]>, u32)> = HashSet::new();
    let mut stack: Vec<(Box<[u8]>, u32)> = Vec::new();
    let start: Box<[u8]> = net.initial.clone().into_boxed_slice();
    stack.push((start, 0));

    while let Some((marking, pos)) = stack.pop() {
        if !visited.insert((marking.clone(), pos)) {
            continue;
        }
        if visited.len() > cfg.state_budget {
            return Ok(ReplayVerdict::BudgetExceeded);
        }
        if pos as usize == n && marking.as_ref() == net.final_marking.as_slice() {
            return Ok(ReplayVerdict::Fits);
        }
        let push = |t_idx: usize, next_pos: u32, stack: &mut Vec<(Box<[u8]>, u32)>| {
            let t = &net.transitions[t_idx];
            if t.inputs.iter().any(|&p| marking[p] == 0) {
                return;
            }
            let mut m2 = marking.clone();
            for &p in &t.inputs {
                m2[p] -= 1;
            }
            for &p in &t.outputs {
                if m2[p] >= cfg.token_bound {
                    return;
                }
                m2[p] += 1;
            }
            stack.push((m2, next_pos));
        };
        for &t_idx in &silent {
            push(t_idx, pos, &mut stack);
        }
        if (pos as usize) < n {
            for &t_idx in &by_label[events[pos as usize] as usize] {
                push(t_idx, pos + 1, &mut stack);
            }
        }
    }
    Ok(ReplayVerdict::NotFits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::compile_tree_to_net;
    use crate::petri::NetBuilder;
    use crate::tree::build::*;
    use crate::tree::ProcessTree;

    fn ev(labels: &[&str]) -> Vec<String> {
        labels.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn seq_net_verdicts() {
        let net = compile_tree_to_net(&ProcessTree::plain(seq(vec![act("a"), act("b")]))).unwrap();
        let cfg = ReplayConfig::default();
        assert_eq!(replay_fits(&net, &ev(&["a", "b"]), &cfg).unwrap(), ReplayVerdict::Fits);
        assert_eq!(replay_fits(&net, &ev(&["a"]), &cfg).unwrap(), ReplayVerdict::NotFits);
        assert_eq!(replay_fits(&net, &ev(&["b", "a"]), &cfg).unwrap(), ReplayVerdict::NotFits);
        assert_eq!(replay_fits(&net, &ev(&["a", "b", "b"]), &cfg).unwrap(), ReplayVerdict::NotFits);
    }

    #[test]
    fn unknown_label_is_not_fits() {
        let net = compile_tree_to_net(&ProcessTree::plain(seq(vec![act("a"), act("b")]))).unwrap();
        let cfg = ReplayConfig::default();
        assert_eq!(replay_fits(&net, &ev(&["a", "x"]), &cfg).unwrap(), ReplayVerdict::NotFits);
    }

    #[test]
    fn empty_trace_fits_silent_tree() {
        let net = compile_tree_to_net(&ProcessTree::new(tau(), vec![]).unwrap()).unwrap();
        let cfg = ReplayConfig::default();
        assert_eq!(replay_fits(&net, &[], &cfg).unwrap(), ReplayVerdict::Fits);
        assert_eq!(replay_fits(&net, &ev(&["a"]), &cfg).unwrap(), ReplayVerdict::NotFits);
    }

    #[test]
    fn duplicate_labels_resolved_existentially() {
        // X( 'a', ->( 'a', 'b' ) ): two transitions labeled a.
        let net = compile_tree_to_net(&ProcessTree::plain(xor(vec![
            act("a"),
            seq(vec![act("a"), act("b")]),
        ])))
        .unwrap();
        let cfg = ReplayConfig::default();
        assert_eq!(replay_fits(&net, &ev(&["a"]), &cfg).unwrap(), ReplayVerdict::Fits);
        assert_eq!(replay_fits(&net, &ev(&["a", "b"]), &cfg).unwrap(), ReplayVerdict::Fits);
        assert_eq!(replay_fits(&net, &ev(&["b"]), &cfg).unwrap(), ReplayVerdict::NotFits);
    }

    #[test]
    fn silent_cycles_terminate() {
        // *( 'a', tau ): the redo is silent, so the net has a silent cycle.
        let net = compile_tree_to_net(&ProcessTree::plain(loop_(act("a"), tau(), 0.5))).unwrap();
        let cfg = ReplayConfig::default();
        assert_eq!(replay_fits(&net, &ev(&["a", "a", "a"]), &cfg).unwrap(), ReplayVerdict::Fits);
        assert_eq!(replay_fits(&net, &[], &cfg).unwrap(), ReplayVerdict::NotFits);
    }

    #[test]
    fn tiny_budget_reports_exceeded() {
        let net = compile_tree_to_net(&ProcessTree::plain(and(vec![
            act("a"),
            act("b"),
            act("c"),
            act("d"),
        ])))
        .unwrap();
        let cfg = ReplayConfig {
            state_budget: 3,
            token_bound: 8,
        };
        assert_eq!(
            replay_fits(&net, &ev(&["a", "b", "c", "d"]), &cfg).unwrap(),
            ReplayVerdict::BudgetExceeded
        );
    }

    #[test]
    fn verdict_stable_once_budget_suffices() {
        let net = compile_tree_to_net(&ProcessTree::plain(and(vec![act("a"), act("b")]))).unwrap();
        let trace = ev(&["a", "b"]);
        let mut decided_at = None;
        for budget in 1..200 {
            let cfg = ReplayConfig {
                state_budget: budget,
                token_bound: 8,
            };
            let v = replay_fits(&net, &trace, &cfg).unwrap();
            if v != ReplayVerdict::BudgetExceeded {
                decided_at = Some((budget, v));
                break;
            }
        }
        let (budget, verdict) = decided_at.expect("some budget suffices");
        for extra in [1, 10, 1000] {
            let cfg = ReplayConfig {
                state_budget: budget + extra,
                token_bound: 8,
            };
            assert_eq!(replay_fits(&net, &trace, &cfg).unwrap(), verdict);
        }
    }

    #[test]
    fn invalid_net_is_an_error() {
        let mut b = NetBuilder::new();
        let p0 = b.add_place();
        b.add_transition(Some("a"), vec![p0], vec![]);
        let net = b.build(&[p0], &[p0]);
        assert!(replay_fits(&net, &ev(&["a"]), &ReplayConfig::default()).is_err());
    }

    #[test]
    fn token_bound_prunes_unbounded_growth() {
        // A net that can pump tokens: t adds a token to p1 each firing.
        let mut b = NetBuilder::new();
        let p0 = b.add_place();
        let p1 = b.add_place();
        let p2 = b.add_place();
        b.add_transition(None, vec![p0], vec![p0, p1]);
        b.add_transition(Some("a"), vec![p0], vec![p2]);
        let net = b.build(&[p0], &[p2]);
        let cfg = ReplayConfig {
            state_budget: 1_000_000,
            token_bound: 4,
        };
        // Fits without pumping; the bound keeps the silent pump finite.
        assert_eq!(replay_fits(&net, &ev(&["a"]), &cfg).unwrap(), ReplayVerdict::Fits);
        assert_eq!(replay_fits(&net, &[], &cfg).unwrap(), ReplayVerdict::NotFits);
    }
}
