//! Deterministic seeding.
//!
//! Every stochastic routine in this crate is a pure function of
//! `(parameters, seed)`. Monte Carlo harnesses derive one independent
//! stream per sample from a master seed, so ensembles can be evaluated
//! in parallel and still reduce to bit-identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// RNG for a single-path operation.
pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from a master seed.
///
/// Streams with distinct indices never overlap, so per-sample work can be
/// scheduled on any thread without affecting the reduced result.
pub fn rng_for_sample(master_seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}
