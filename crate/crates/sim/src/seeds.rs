//! Per-trial random streams.
//!
//! Trial `t` of a sweep with base seed `s` uses the seed `mix(s, t)`. Each
//! purpose reads its own ChaCha8 stream of that seed, so the channel a trial
//! sees does not depend on which schemes run or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Channel = 0,
    Init = 1,
    Csi = 2,
    Baseline = 3,
}

/// SplitMix64 finalizer applied to the base seed and trial index.
pub fn trial_seed(base_seed: u64, trial: u64) -> u64 {
    let mut z = base_seed ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
