//! Randomized invariants over the core pipeline: simulation against replay,
//! replay against enumerated languages, text round-trips and the rank-test
//! identities that hold for any input.

use minebench::compile::compile_tree_to_net;
use minebench::language::tree_language_bounded;
use minebench::population::{generate_tree, PopulationSpec};
use minebench::replay::{replay_fits, ReplayConfig, ReplayVerdict};
use minebench::seeds::rng_for;
use minebench::simulate::simulate_log;
use minebench::stats::{jonckheere, kruskal_wallis, posthoc_pairwise, rank_all};
use minebench::text::{parse_tree, write_tree};
use minebench::tree::ProcessTree;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn spec(loops: bool) -> PopulationSpec {
    PopulationSpec {
        size_min: 3,
        size_mode: 5,
        size_max: 8,
        p_seq: 0.4,
        p_xor: 0.25,
        p_and: 0.15,
        p_or: 0.1,
        p_loop: if loops { 0.1 } else { 0.0 },
        p_silent: 0.2,
        p_duplicate: 0.2,
        p_ltdep: 0.2,
        infrequent_paths: true,
    }
}

fn tree_from(seed: u64, loops: bool) -> ProcessTree {
    let mut rng = rng_for(seed, &["prop", "tree"]);
    generate_tree(&spec(loops), &mut rng)
}

/// Groups of light-tailed values with deliberate ties from rounding.
fn group_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec((0..400u32).prop_map(|v| v as f64 / 10.0), 1..8),
        2..5,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simulated_traces_always_replay_on_their_own_net(seed: u64) {
        let tree = tree_from(seed, true);
        let net = compile_tree_to_net(&tree).unwrap();
        let mut rng = rng_for(seed, &["prop", "sim"]);
        let log = simulate_log(&tree, 10, &mut rng);
        let cfg = ReplayConfig::default();
        for trace in &log.traces {
            prop_assert_eq!(
                replay_fits(&net, &trace.events, &cfg).unwrap(),
                ReplayVerdict::Fits
            );
        }
    }

    #[test]
    fn loop_free_replay_agrees_with_language_membership(seed: u64) {
        let tree = tree_from(seed, false);
        let net = compile_tree_to_net(&tree).unwrap();
        let lang = tree_language_bounded(&tree, 0, 1_000_000);
        prop_assert!(!lang.truncated);
        let alphabet: Vec<String> = tree.alphabet().into_iter().collect();
        let cfg = ReplayConfig::default();
        let mut rng = rng_for(seed, &["prop", "strings"]);
        for _ in 0..10 {
            let len = rng.random_range(0..=alphabet.len() + 2);
            let s: Vec<String> = (0..len)
                .map(|_| alphabet[rng.random_range(0..alphabet.len())].clone())
                .collect();
            let verdict = replay_fits(&net, &s, &cfg).unwrap();
            prop_assert_ne!(&verdict, &ReplayVerdict::BudgetExceeded);
            prop_assert_eq!(verdict == ReplayVerdict::Fits, lang.contains(&s));
        }
    }

    #[test]
    fn decided_verdicts_survive_budget_increases(seed: u64, grow in 1usize..1000) {
        let tree = tree_from(seed, true);
        let net = compile_tree_to_net(&tree).unwrap();
        let mut rng = rng_for(seed, &["prop", "budget"]);
        let log = simulate_log(&tree, 3, &mut rng);
        let alphabet: Vec<String> = tree.alphabet().into_iter().collect();
        for trace in &log.traces {
            // One honest trace and one crude mutation exercise both verdicts.
            let mut broken = trace.events.clone();
            broken.push(alphabet[rng.random_range(0..alphabet.len())].clone());
            broken.push(alphabet[rng.random_range(0..alphabet.len())].clone());
            for events in [&trace.events, &broken] {
                let small = ReplayConfig { state_budget: 50 + grow, ..ReplayConfig::default() };
                let big = ReplayConfig {
                    state_budget: small.state_budget * 2,
                    ..ReplayConfig::default()
                };
                let first = replay_fits(&net, events, &small).unwrap();
                if first != ReplayVerdict::BudgetExceeded {
                    prop_assert_eq!(first, replay_fits(&net, events, &big).unwrap());
                }
            }
        }
    }

    #[test]
    fn tree_text_round_trips_exactly(seed: u64) {
        let tree = tree_from(seed, true);
        let text = write_tree(&tree).unwrap();
        let back = parse_tree(&text).unwrap();
        prop_assert_eq!(back, tree);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ranks_sum_to_the_triangular_number(groups in group_strategy()) {
        let ranks = rank_all(&groups);
        let n: usize = groups.iter().map(|g| g.len()).sum();
        let total: f64 = ranks.iter().flatten().sum();
        // Average ranks are halves, so the sum is exact in binary.
        prop_assert_eq!(total, (n * (n + 1)) as f64 / 2.0);
    }

    #[test]
    fn kruskal_statistic_ignores_monotone_transforms(groups in group_strategy()) {
        let shifted: Vec<Vec<f64>> = groups
            .iter()
            .map(|g| g.iter().map(|x| 2.0 * x + 7.0).collect())
            .collect();
        match (kruskal_wallis(&groups), kruskal_wallis(&shifted)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.statistic, b.statistic),
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert!(false, "verdicts diverged: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn jonckheere_directions_are_complementary_without_ties(
        seed: u64,
        sizes in prop::collection::vec(1usize..8, 2..5),
    ) {
        let n: usize = sizes.iter().sum();
        let mut values: Vec<f64> = (0..n).map(|v| v as f64).collect();
        let mut rng = rng_for(seed, &["prop", "jt"]);
        values.shuffle(&mut rng);
        let mut groups = Vec::new();
        let mut it = values.into_iter();
        for &s in &sizes {
            groups.push((&mut it).take(s).collect::<Vec<f64>>());
        }
        let fwd = jonckheere(&groups).unwrap();
        groups.reverse();
        let rev = jonckheere(&groups).unwrap();
        let pairs: usize = sizes
            .iter()
            .enumerate()
            .map(|(i, a)| sizes[i + 1..].iter().map(|b| a * b).sum::<usize>())
            .sum();
        prop_assert_eq!(fwd.statistic + rev.statistic, pairs as f64);
    }
}

#[test]
fn posthoc_familywise_error_stays_near_alpha() {
    let mut rng = rng_for(0x90fa, &["posthoc", "null"]);
    let sims = 200;
    let mut families_flagged = 0;
    for _ in 0..sims {
        let groups: Vec<Vec<f64>> =
            (0..4).map(|_| (0..25).map(|_| rng.random::<f64>()).collect()).collect();
        let ph = posthoc_pairwise(&groups, 0.05).unwrap();
        if ph.pairs.iter().any(|p| p.significant) {
            families_flagged += 1;
        }
    }
    let rate = families_flagged as f64 / sims as f64;
    assert!(rate <= 0.08, "family-wise error rate {rate} exceeds alpha + slack");
}
