//! Seeding contract for every random stream.
//!
//! All streams are ChaCha8. Worker `w` of a run seeded with `s` uses
//! `seed_from_u64(s + w)` (wrapping). Auxiliary streams (confidence reruns,
//! scale candidates) use `seed_from_u64(s)` with a distinct ChaCha stream id,
//! so they never overlap the worker streams, which all use stream 0.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as Rng;

/// Generator identity recorded in result metadata.
pub const RNG_IDENTITY: &str = "ChaCha8Rng (rand_chacha 0.9)";

/// Stream ids below this are free for callers; confidence reruns use the range above.
pub const CONFIDENCE_STREAM_BASE: u64 = 1 << 32;

pub fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(worker as u64))
}

pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
