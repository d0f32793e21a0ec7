//! Seedable, splittable random streams.
//!
//! Every trial draws from its own ChaCha8 stream selected by
//! `(seed, n, trial)`, so results do not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for trial `trial` at network size `n`.
pub fn trial_rng(seed: u64, n: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(splitmix64(splitmix64(n) ^ trial));
    rng
}

/// Sub-stream for one stage of a trial (placement, caching, demands, ...).
pub fn stage_rng(seed: u64, n: u64, trial: u64, stage: Stage) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed) ^ stage as u64);
    rng.set_stream(splitmix64(splitmix64(n) ^ trial));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    Nodes = 0x6e6f,
    Caches = 0x6361,
    Demands = 0x6465,
    Sources = 0x736f,
}
