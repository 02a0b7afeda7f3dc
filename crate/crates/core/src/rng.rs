//! Seeded random streams.
//!
//! Every stochastic operation in the crate draws from a [`ChaCha8Rng`] keyed by
//! `ChaCha8Rng::seed_from_u64(seed)` and positioned on ChaCha stream `stream`.
//! Child work items (optimizer restarts, simulated settings) use their index as
//! the stream id, so their draws do not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` of master seed `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
