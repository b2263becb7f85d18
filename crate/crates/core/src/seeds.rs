//! Deterministic seed derivation.
//!
//! Every randomized stage of an experiment draws from its own RNG, seeded by
//! hashing the master seed together with a path of identifying components
//! (cell, miner, model index, stage name). Components are length-prefixed
//! before hashing so distinct paths cannot collide by concatenation, and the
//! digest is SHA-256, so collisions between derived seeds are negligible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Derives a child seed from `master` and a path of components.
pub fn derive_seed(master: u64, path: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for part in path {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

/// RNG for a derived stage. ChaCha keeps the stream identical across
/// platforms and releases.
pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Convenience: derive and seed in one step.
pub fn rng_for(master: u64, path: &[&str]) -> ChaCha12Rng {
    rng_from_seed(derive_seed(master, path))
}
