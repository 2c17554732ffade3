//! Deterministic seed derivation.
//!
//! Every random stream in the crate is a [`ChaCha8Rng`] whose seed is derived
//! from a master seed and a path of integer tags (cell index, repeat, chunk,
//! ...). Work split into chunks therefore produces the same numbers no matter
//! how many threads evaluate it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of Monte Carlo draws generated from one chunk seed.
pub const CHUNK_DRAWS: usize = 1024;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a tag. Distinct tags give
/// statistically independent streams.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ tag.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Derives a seed along a path of tags.
pub fn derive_path(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |s, &t| derive_seed(s, t))
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Splits `total` draws into fixed-size chunks: `(chunk_index, len)`.
pub(crate) fn chunks(total: usize) -> impl Iterator<Item = (u64, usize)> + Clone {
    let full = total / CHUNK_DRAWS;
    let rem = total % CHUNK_DRAWS;
    (0..full).map(|c| (c as u64, CHUNK_DRAWS)).chain((rem > 0).then_some((full as u64, rem)))
}
