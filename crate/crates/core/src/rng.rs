//! Seed derivation.
//!
//! Every random stream in the generator is a ChaCha8 stream keyed by 64-bit
//! values, so output depends only on the seed and never on platform, thread
//! count or scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG type threaded through scene building, dynamics and sampling.
pub type GenRng = ChaCha8Rng;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mix a salt into a seed.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt))
}

/// The independent stream for sample `index` of a run seeded with `seed`.
///
/// Sample `i` can be regenerated alone from `(seed, i)`.
pub fn sample_rng(seed: u64, index: u64) -> GenRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Map a 64-bit hash onto `[0, 1)`.
pub fn unit_interval(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}
