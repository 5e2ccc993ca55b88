//! Seeded random number streams.
//!
//! Replicated experiments need statistically independent randomness per
//! replication that does not depend on scheduling. ChaCha8 exposes 2^64
//! independent streams per seed, so stream `r` of seed `s` always yields
//! the same draws no matter which thread runs replication `r`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
