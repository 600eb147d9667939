//! Deterministic RNG stream derivation.
//!
//! Every randomized stage derives its own ChaCha stream from a single user
//! seed, so runs are bit-reproducible and independent stages never share a
//! stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fixed stream ids, one per randomized stage.
pub mod stream {
    pub const WEIGHT_INIT: u64 = 0;
    pub const DROPOUT: u64 = 1;
    pub const SPLIT_SHUFFLE: u64 = 2;
    pub const EPOCH_ORDER: u64 = 3;
    /// Base for per-level generation streams; level `i` uses `GENERATE + i`.
    pub const GENERATE: u64 = 1 << 32;
}

/// RNG for stream `stream` of the run identified by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
