//! Seeded random streams.
//!
//! Every stochastic routine takes a `u64` seed and builds a ChaCha8 stream
//! from it. Independent sub-streams (Monte Carlo run `i`, bias draw `i`, sweep
//! point `i`) get their own seed from [`derive_seed`], so work items can be
//! evaluated in any order or in parallel and still produce identical output.
//! Gaussian variates come from the ziggurat sampler in `rand_distr`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of sub-stream `index` under `base`:
/// `splitmix64(base ^ splitmix64(index))`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
