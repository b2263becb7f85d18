//! Footprint-based discovery with length-one-loop handling.
//!
//! Activities that directly follow themselves are set aside first. The core
//! algorithm runs on the remaining events: it derives causal, parallel and
//! unrelated relations from the directly-follows graph, enumerates maximal
//! pairs (A, B) of mutually unrelated sets with full causality from A to B,
//! and creates one place per maximal pair plus a source and a sink. Each
//! self-looping activity is then reattached as a token-neutral transition on
//! the place whose pair matches its neighborhood (A minus B, B minus A),
//! falling back to any place whose pair contains that neighborhood, and as
//! a last resort to a fresh unmarked place, which keeps the net well formed
//! at the cost of rejecting the looping activity entirely.
//!
//! Empty traces carry no footprint information and are skipped; the
//! resulting net never accepts the empty trace.

use crate::dfg::Dfg;
use crate::miners::MinerError;
use crate::petri::{NetBuilder, PetriNet};
use std::collections::BTreeSet;

const MAX_ACTIVITIES: usize = 64;
const MAX_PAIRS: usize = 100_000;

pub fn alpha_plus_net(traces: &[Vec<String>]) -> Result<PetriNet, MinerError> {
    if traces.is_empty() {
        return Err(MinerError::Failure("empty log".into()));
    }
    let full = Dfg::from_traces(traces);
    if full.activities.is_empty() {
        return Err(MinerError::Failure("log has no events".into()));
    }
    let l1l: BTreeSet<String> = full
        .activities
        .iter()
        .enumerate()
        .filter(|&(i, _)| full.directly_follows(i, i))
        .map(|(_, a)| a.clone())
        .collect();
    let filtered: Vec<Vec<String>> = traces
        .iter()
        .map(|t| t.iter().filter(|e| !l1l.contains(*e)).cloned().collect::<Vec<_>>())
        .filter(|t| !t.is_empty())
        .collect();
    if filtered.is_empty() {
        return Err(MinerError::Failure(
            "no events remain outside self-loop activities".into(),
        ));
    }
    let dfg = Dfg::from_traces(&filtered);
    let n = dfg.activities.len();
    if n > MAX_ACTIVITIES {
        return Err(MinerError::Failure(format!("alphabet of {n} exceeds {MAX_ACTIVITIES}")));
    }

    // Relation bitmasks over the filtered alphabet.
    let mut causal = vec![0u64; n];
    let mut unrel = vec![0u64; n];
    for a in 0..n {
        for b in 0..n {
            if dfg.causal(a, b) {
                causal[a] |= 1 << b;
            }
            if a != b && dfg.unrelated(a, b) {
                unrel[a] |= 1 << b;
            }
        }
    }

    let pairs = enumerate_pairs(n, &causal, &unrel)?;
    let maximal = keep_maximal(n, &causal, &unrel, pairs);

    let mut b = NetBuilder::new();
    let source = b.add_place();
    let sink = b.add_place();
    let pair_places: Vec<usize> = maximal.iter().map(|_| b.add_place()).collect();
    let core_t: Vec<usize> = (0..n)
        .map(|a| b.add_transition(Some(&dfg.activities[a]), vec![], vec![]))
        .collect();
    for &s in &dfg.starts {
        b.add_input(core_t[s], source);
    }
    for &e in &dfg.ends {
        b.add_output(core_t[e], sink);
    }
    for (idx, &(pa, pb)) in maximal.iter().enumerate() {
        for a in bits(pa) {
            b.add_output(core_t[a], pair_places[idx]);
        }
        for t in bits(pb) {
            b.add_input(core_t[t], pair_places[idx]);
        }
    }

    // Reattach each self-looping activity on the place matching its
    // neighborhood in the unfiltered log.
    for l in &l1l {
        let li = full.index_of(l).expect("activity from the full log");
        let mut pred = 0u64;
        let mut succ = 0u64;
        for (fi, label) in full.activities.iter().enumerate() {
            let Some(i) = dfg.index_of(label) else { continue };
            if full.directly_follows(fi, li) {
                pred |= 1 << i;
            }
            if full.directly_follows(li, fi) {
                succ |= 1 << i;
            }
        }
        let want = (pred & !succ, succ & !pred);
        let place = maximal
            .iter()
            .position(|&p| p == want)
            .or_else(|| {
                (want.0 | want.1 != 0).then(|| {
                    maximal
                        .iter()
                        .position(|&(pa, pb)| want.0 & !pa == 0 && want.1 & !pb == 0)
                })
                .flatten()
            })
            .map(|i| pair_places[i])
            .unwrap_or_else(|| b.add_place());
        b.add_transition(Some(l), vec![place], vec![place]);
    }

    let net = b.build(&[source], &[sink]);
    net.validate()
        .map_err(|e| MinerError::Failure(format!("footprint yields no workflow net: {e}")))?;
    Ok(net)
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask & (1 << i) != 0)
}

/// All pairs (A, B): members of A pairwise unrelated, members of B pairwise
/// unrelated, and every A member causally precedes every B member.
fn enumerate_pairs(
    n: usize,
    causal: &[u64],
    unrel: &[u64],
) -> Result<Vec<(u64, u64)>, MinerError> {
    let mut a_sets = Vec::new();
    grow_sets(0, u64::MAX, 0, u64::MAX, n, unrel, Some(causal), &mut a_sets)?;
    let mut pairs = Vec::new();
    for &(a_mask, image) in &a_sets {
        let mut b_sets = Vec::new();
        grow_sets(0, u64::MAX, 0, image, n, unrel, None, &mut b_sets)?;
        for &(b_mask, _) in &b_sets {
            pairs.push((a_mask, b_mask));
            if pairs.len() > MAX_PAIRS {
                return Err(MinerError::Failure("relation structure too rich".into()));
            }
        }
    }
    Ok(pairs)
}

/// Extends pairwise-unrelated sets one activity at a time. With `causal`
/// given, `image` carries the intersection of members' causal images and
/// sets whose image empties are pruned; `allowed` restricts candidates.
#[allow(clippy::too_many_arguments)]
fn grow_sets(
    members: u64,
    image: u64,
    next: usize,
    allowed: u64,
    n: usize,
    unrel: &[u64],
    causal: Option<&[u64]>,
    out: &mut Vec<(u64, u64)>,
) -> Result<(), MinerError> {
    for a in next..n {
        let bit = 1u64 << a;
        if allowed & bit == 0 || unrel[a] & members != members {
            continue;
        }
        let new_image = causal.map_or(0, |c| image & c[a]);
        if causal.is_some() && new_image == 0 {
            continue;
        }
        let set = members | bit;
        out.push((set, new_image));
        if out.len() > MAX_PAIRS {
            return Err(MinerError::Failure("relation structure too rich".into()));
        }
        grow_sets(set, new_image, a + 1, allowed, n, unrel, causal, out)?;
    }
    Ok(())
}

fn current_image(members: u64, causal: &[u64]) -> u64 {
    bits(members).fold(u64::MAX, |acc, a| acc & causal[a])
}

/// A pair is maximal when no single activity extends either side.
fn keep_maximal(
    n: usize,
    causal: &[u64],
    unrel: &[u64],
    pairs: Vec<(u64, u64)>,
) -> Vec<(u64, u64)> {
    let mut maximal: Vec<(u64, u64)> = pairs
        .into_iter()
        .filter(|&(a_mask, b_mask)| {
            let grow_a = (0..n).any(|x| {
                let bit = 1u64 << x;
                a_mask & bit == 0 && unrel[x] & a_mask == a_mask && causal[x] & b_mask == b_mask
            });
            if grow_a {
                return false;
            }
            let image = current_image(a_mask, causal);
            let grow_b = (0..n).any(|y| {
                let bit = 1u64 << y;
                b_mask & bit == 0 && image & bit != 0 && unrel[y] & b_mask == b_mask
            });
            !grow_b
        })
        .collect();
    maximal.sort_unstable();
    maximal.dedup();
    maximal
}
