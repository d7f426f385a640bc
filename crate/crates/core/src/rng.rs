//! Counter-based random substreams.
//!
//! A session is driven by one 64-bit master seed. Pair `i` draws from ChaCha
//! stream `i` of that seed, so pairs can be simulated in any order, or in
//! parallel, with identical results. Session-level draws (for example a
//! fixed-basis eavesdropper picking her basis once) use a reserved stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream reserved for per-session draws.
pub const SESSION_STREAM: u64 = u64::MAX;

pub fn pair_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn session_rng(seed: u64) -> ChaCha8Rng {
    pair_rng(seed, SESSION_STREAM)
}
