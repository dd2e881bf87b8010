//! Seeding for reproducible parallel simulation.
//!
//! Every unit of work (a "chain stream") gets its own generator whose seed
//! depends only on the run seed and the stream index:
//!
//! 1. `subseed = splitmix64(seed + (index + 1) * 0x9E3779B97F4A7C15)`
//!    (wrapping arithmetic). SplitMix64 is the finalizer from Steele, Lea
//!    and Flood with multipliers `0xBF58476D1CE4E5B9` and
//!    `0x94D049BB133111EB` and shifts 30, 27, 31.
//! 2. The stream generator is ChaCha with 8 rounds, seeded through
//!    `SeedableRng::seed_from_u64(subseed)`.
//!
//! Uniform `f64` values use the top 53 bits of a `u64` output. Batches
//! therefore reproduce bit-for-bit across platforms and thread counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every simulated stream.
pub type StreamRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` under run seed `seed`.
#[inline]
pub fn subseed(seed: u64, index: u64) -> u64 {
    splitmix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn stream_rng(seed: u64, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(subseed(seed, index))
}
