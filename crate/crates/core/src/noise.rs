//! Noise injection that turns fitting traces into certified non-fitting
//! ones.
//!
//! Five edit operations are available: inserting a model activity at a
//! random position, duplicating an event in place, removing an event,
//! swapping two consecutive events, and swapping two events at distinct
//! random positions. A noising round applies each operation independently
//! with the configured probability, forcing one applicable operation when
//! none fired, then replays the result against the model. Rounds repeat on
//! the same trace until replay rejects it or the round cap is hit; a trace
//! the cap cannot break is discarded and a replacement is drawn from the
//! caller's pool, with the full round budget again. The returned trace is
//! always certified non-fitting by exact replay.

use crate::petri::PetriNet;
use crate::replay::{replay_fits, ReplayConfig, ReplayVerdict};
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseType {
    Add,
    Duplicate,
    Remove,
    SwapConsecutive,
    SwapRandom,
}

pub const ALL_NOISE_TYPES: [NoiseType; 5] = [
    NoiseType::Add,
    NoiseType::Duplicate,
    NoiseType::Remove,
    NoiseType::SwapConsecutive,
    NoiseType::SwapRandom,
];

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("operation {0:?} does not apply to a trace of {1} events")]
    Inapplicable(NoiseType, usize),
    #[error("model alphabet is empty")]
    EmptyAlphabet,
    #[error("replacement pool exhausted after {discarded} unbreakable traces")]
    PoolExhausted { discarded: usize },
}

/// Most noising rounds spent on one trace before it is discarded.
pub const MAX_NOISE_ROUNDS: usize = 5;

/// Applies one edit in place. Errors when the trace is too short for the
/// operation; adding is always possible.
pub fn apply_noise_once(
    events: &mut Vec<String>,
    ty: NoiseType,
    alphabet: &[String],
    rng: &mut impl Rng,
) -> Result<(), NoiseError> {
    let n = events.len();
    match ty {
        NoiseType::Add => {
            if alphabet.is_empty() {
                return Err(NoiseError::EmptyAlphabet);
            }
            let act = alphabet.choose(rng).expect("nonempty").clone();
            let at = rng.random_range(0..=n);
            events.insert(at, act);
        }
        NoiseType::Duplicate => {
            if n < 1 {
                return Err(NoiseError::Inapplicable(ty, n));
            }
            let i = rng.random_range(0..n);
            let copy = events[i].clone();
            events.insert(i + 1, copy);
        }
        NoiseType::Remove => {
            if n < 1 {
                return Err(NoiseError::Inapplicable(ty, n));
            }
            events.remove(rng.random_range(0..n));
        }
        NoiseType::SwapConsecutive => {
            if n < 2 {
                return Err(NoiseError::Inapplicable(ty, n));
            }
            let i = rng.random_range(0..n - 1);
            events.swap(i, i + 1);
        }
        NoiseType::SwapRandom => {
            if n < 2 {
                return Err(NoiseError::Inapplicable(ty, n));
            }
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            events.swap(i, j);
        }
    }
    Ok(())
}

fn applicable(ty: NoiseType, len: usize) -> bool {
    match ty {
        NoiseType::Add => true,
        NoiseType::Duplicate | NoiseType::Remove => len >= 1,
        NoiseType::SwapConsecutive | NoiseType::SwapRandom => len >= 2,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseOutcome {
    /// The certified non-fitting trace.
    pub events: Vec<String>,
    /// Rounds spent on the trace that finally broke.
    pub rounds: usize,
    /// Operations applied to that trace, in order.
    pub applied: Vec<NoiseType>,
    /// Traces discarded as unbreakable before this one.
    pub discarded: usize,
}

/// Noises `first` until it no longer replays on `net`, falling back to pool
/// traces when the round cap cannot break it.
///
/// Only an exact rejection counts: a budget-exceeded replay keeps the trace
/// in play, so the result is never mislabeled.
pub fn make_nonfitting(
    net: &PetriNet,
    alphabet: &[String],
    first: Vec<String>,
    pool: &mut Vec<Vec<String>>,
    noise_prob: f64,
    replay_cfg: &ReplayConfig,
    rng: &mut impl Rng,
) -> Result<NoiseOutcome, NoiseError> {
    if alphabet.is_empty() {
        return Err(NoiseError::EmptyAlphabet);
    }
    let mut discarded = 0;
    let mut current = first;
    loop {
        let mut applied = Vec::new();
        for round in 1..=MAX_NOISE_ROUNDS {
            let mut fired = 0;
            for ty in ALL_NOISE_TYPES {
                if applicable(ty, current.len()) && rng.random_bool(noise_prob) {
                    apply_noise_once(&mut current, ty, alphabet, rng).expect("checked");
                    applied.push(ty);
                    fired += 1;
                }
            }
            if fired == 0 {
                let options: Vec<NoiseType> = ALL_NOISE_TYPES
                    .into_iter()
                    .filter(|&t| applicable(t, current.len()))
                    .collect();
                let ty = *options.choose(rng).expect("add always applies");
                apply_noise_once(&mut current, ty, alphabet, rng).expect("checked");
                applied.push(ty);
            }
            let verdict = replay_fits(net, &current, replay_cfg).expect("net validated");
            if verdict == ReplayVerdict::NotFits {
                return Ok(NoiseOutcome { events: current, rounds: round, applied, discarded });
            }
        }
        discarded += 1;
        match pool.pop() {
            Some(next) => current = next,
            None => return Err(NoiseError::PoolExhausted { discarded }),
        }
    }
}
