//! Keyed deterministic randomness.
//!
//! Every random draw in the crate comes from a ChaCha stream whose seed is a
//! hash of explicit key words (global seed, node identifiers, drop index...).
//! A draw therefore depends only on its key, never on evaluation order or on
//! how many other draws happened before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds key words into one 64-bit seed. Order of `parts` matters.
pub fn mix(parts: &[u64]) -> u64 {
    parts.iter().fold(GOLDEN_GAMMA, |acc, &p| {
        splitmix64(acc.wrapping_add(GOLDEN_GAMMA) ^ splitmix64(p.wrapping_add(GOLDEN_GAMMA)))
    })
}

pub fn keyed_rng(parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(parts))
}
