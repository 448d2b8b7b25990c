//! Seeded randomness.
//!
//! Every stochastic routine takes a `u64` seed and builds a [`ChaCha8Rng`]
//! from it with `seed_from_u64`. ChaCha8 and its seed expansion are fully
//! specified, so streams are identical on every platform.
//!
//! Per-run seeds are derived from a master seed by feeding `master + index`
//! (wrapping) through the same generator and taking its first output.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for stream `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    ChaCha8Rng::seed_from_u64(master.wrapping_add(index)).next_u64()
}

/// Two-level derivation, used for (scenario point, run) pairs.
pub fn derive_seed2(master: u64, outer: u64, inner: u64) -> u64 {
    derive_seed(derive_seed(master, outer), inner)
}
