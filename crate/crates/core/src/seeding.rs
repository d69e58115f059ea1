//! Deterministic RNG stream allocation.
//!
//! Every stochastic component draws from its own ChaCha stream derived from
//! the single run seed, so runs are reproducible bit for bit and independent
//! of evaluation order. Stream ids are fixed; adding a consumer means
//! reserving a new id here.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_TOPOLOGY: u64 = 1;
pub const STREAM_MOBILITY: u64 = 2;
pub const STREAM_MODEL_INIT: u64 = 3;
/// Per-transmitter channel realizations: base + transmitter index.
pub const STREAM_LINK_BASE: u64 = 1_000;
/// Per-agent action selection and replay sampling: base + agent index.
pub const STREAM_AGENT_BASE: u64 = 2_000;

/// Independent stream `stream` of the ChaCha generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
