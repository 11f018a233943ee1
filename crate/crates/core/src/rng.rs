//! Seeded random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by a 64-bit
//! seed. Child seeds are derived from a parent seed and an index path with
//! the SplitMix64 finalizer:
//!
//! ```text
//! h_0     = mix(master)
//! h_{k+1} = mix(h_k ^ mix(path[k] + 1))
//! ```
//!
//! so a task's stream depends only on its position in the work tree, never
//! on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 output function.
pub fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(mix(master), |h, &p| mix(h ^ mix(p.wrapping_add(1))))
}
