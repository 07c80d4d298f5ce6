//! Seeded randomness with stream separation.
//!
//! Reproducible runs need independent deterministic streams for key
//! generation, the offline gain encryption, and the per-frame camera
//! encryptions, so that in-process and networked deployments draw exactly
//! the same bits from the same master seed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Randomness streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    KeyGen = 0,
    Offline = 1,
    Camera = 2,
    Harness = 3,
}

/// Deterministic RNG for (seed, stream).
pub fn seeded(seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Nondeterministic RNG from OS entropy.
pub fn from_entropy() -> ChaCha20Rng {
    ChaCha20Rng::from_os_rng()
}
