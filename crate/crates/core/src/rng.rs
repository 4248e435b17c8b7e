//! Seeded random streams.
//!
//! Every random draw in the crate comes from [`ChaCha8Rng`]. A unit of work
//! (a layer, a replicate, a k-means restart) gets its own generator built
//! from a 64-bit key and a ChaCha stream id, so results never depend on the
//! order in which units are scheduled.
//!
//! Keys are derived with [`derive_seed`], which folds a list of indices into
//! a parent seed with the SplitMix64 finalizer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a path of indices.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(seed), |acc, &idx| {
        splitmix64(acc ^ splitmix64(idx.wrapping_add(0xD1B5_4A32_D192_ED03)))
    })
}

/// Generator for stream `stream` under key `seed`.
pub fn substream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
