//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use isbjssp_core::Instance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic random `n x m` instance.
pub fn random_instance(m: usize, n: usize, seed: u64) -> Arc<Instance> {
    Arc::new(Instance::generate(m, n, &mut ChaCha8Rng::seed_from_u64(seed)))
}
