//! Seed derivation.
//!
//! All randomness is drawn from ChaCha8 streams. A stream is identified by a
//! 64-bit seed and a textual key; the key is folded in with FNV-1a and mixed
//! with SplitMix64 so that every (seed, key) pair yields an independent,
//! platform-stable sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed for the sub-stream named `key` under the top-level `seed`.
pub fn derive_seed(seed: u64, key: &str) -> u64 {
    splitmix64(seed ^ splitmix64(fnv1a64(key.as_bytes())))
}

pub fn stream(seed: u64, key: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, key))
}
