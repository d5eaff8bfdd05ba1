//! Seeded random number generation.
//!
//! Every random object is drawn from a [`ChaCha8Rng`], a counter-based stream
//! cipher generator, so that a 64-bit seed fully determines the output on
//! every platform. Work split across trials or restarts derives one child
//! seed per task with [`child_seed`], which makes results independent of the
//! order in which tasks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Seed = u64;
pub type StdRng = ChaCha8Rng;

pub fn rng_from_seed(seed: Seed) -> StdRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for sub-task `index` of a job seeded with `master`.
pub fn child_seed(master: Seed, index: u64) -> Seed {
    mix64(master ^ mix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}
