//! Seed derivation. Every stochastic component draws from a ChaCha stream
//! whose seed is a pure function of a master seed and an index path.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Sub-seed for item `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index))
}

/// Stream tags so that unrelated consumers of one master seed never collide.
pub(crate) mod stream {
    pub const TRIALS: u64 = 0x7472_6961_6c73;
    pub const GRID: u64 = 0x6772_6964;
    pub const ITERATION: u64 = 0x6974_6572;
    pub const UNION: u64 = 0x0075_6e69_6f6e;
    pub const NODE_IDS: u64 = 0x0069_6473;
    pub const PRIVATE: u64 = 0x7072_6976;
    pub const WEIGHTS: u64 = 0x7765_6967_6874;
    pub const REPETITION: u64 = 0x7265_7073;
    pub const GENERATOR: u64 = 0x0067_656e;
    pub const EXPERIMENT: u64 = 0x0065_7870;
}

pub(crate) fn tagged(master: u64, tag: u64, index: u64) -> u64 {
    derive_seed(derive_seed(master, tag), index)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
