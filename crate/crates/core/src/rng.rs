//! Deterministic seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` keyed by a seed mixed
//! from a tuple of integers (episode seed, tick, group, ...). Streams never
//! share state, so the order in which parallel workers run cannot change any
//! draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a list of words into a single seed.
pub fn derive(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6F6B_6179_706C_616E, |acc, &w| mix(acc ^ mix(w)))
}

pub fn stream(words: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(words))
}

// Domain tags keep streams for different purposes apart even when the other
// words coincide.
pub(crate) const TAG_ENV: u64 = 1;
pub(crate) const TAG_TARGET: u64 = 2;
pub(crate) const TAG_PLAN: u64 = 3;
pub(crate) const TAG_SWARM: u64 = 4;
pub(crate) const TAG_BESTS: u64 = 5;
pub(crate) const TAG_EVOLVE: u64 = 6;
pub(crate) const TAG_BASELINE: u64 = 7;
