//! Counter-based random streams.
//!
//! Every path owns a 64-bit seed derived from `(base_seed, path_index)`; inside
//! a path, independent streams (Brownian increments, jump times, jump sizes) are
//! selected with the ChaCha stream counter. Nothing depends on thread
//! scheduling, so a Monte Carlo run is reproducible at any level of
//! parallelism.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream carrying the Brownian increments of a path.
pub const BROWNIAN_STREAM: u64 = 0;
/// Stream carrying jump counts, times and sizes.
pub const JUMP_STREAM: u64 = 1;
/// First stream id free for experiment-level randomness.
pub const USER_STREAM: u64 = 16;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of path number `index` in a run keyed by `base_seed`.
pub fn path_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base_seed) ^ splitmix64(index.wrapping_add(0xA5A5_A5A5)))
}

/// Generator for stream `stream_id` of the path with seed `seed`.
pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut z = seed;
    for chunk in key.chunks_exact_mut(8) {
        z = splitmix64(z);
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream_id);
    rng
}
