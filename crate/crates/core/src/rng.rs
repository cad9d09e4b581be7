//! Counter-derived random streams.
//!
//! Every stochastic routine takes a user seed and draws from ChaCha8
//! streams addressed by an integer index, so work can be split across any
//! number of threads without changing a single draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mixes `tag` into `seed` (splitmix64 finalizer) to get an independent
/// seed for a sub-task.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `index`-th stream under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

// tags separating the different consumers of one user seed
pub(crate) const TAG_RESAMPLE: u64 = 1;
pub(crate) const TAG_ROOT: u64 = 2;
pub(crate) const TAG_PROJECT: u64 = 3;
pub(crate) const TAG_TRUTH: u64 = 4;
pub(crate) const TAG_SAMPLE: u64 = 5;
