//! Deterministic random substreams.
//!
//! Every random draw in an experiment comes from a ChaCha8 stream keyed by a
//! tuple of integers (master seed, run id, round, purpose, ...). Keys are
//! folded through SplitMix64 so that nearby tuples give unrelated streams,
//! and a stream can be re-derived from its key alone. That makes any round
//! of any run replayable without touching the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose tags keep streams for different consumers in the same round apart.
pub mod tag {
    pub const GRAPH: u64 = 0x6772_6170;
    pub const MODEL: u64 = 0x6d6f_6465;
    pub const CORRUPTION: u64 = 0x636f_7272;
    pub const LEARNER_CASCADE: u64 = 0x6c63_6173;
    pub const COMPARATOR_CASCADE: u64 = 0x6363_6173;
    pub const EXPLORE: u64 = 0x6578_706c;
    pub const ORACLE: u64 = 0x6f72_6163;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a key tuple into a single 64-bit seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x243f_6a88_85a3_08d3, |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

pub fn substream(parts: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(parts))
}
