//! Seed derivation for reproducible, worker-independent parallel runs.
//!
//! Every trial, path or sample draws from a generator seeded by
//! `(base seed, stream, index)`. Results are therefore functions of the base
//! seed alone, no matter how work is distributed over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keep independent uses of the same base seed apart.
pub const STREAM_TRIAL: u64 = 0x01;
pub const STREAM_PATH: u64 = 0x02;
pub const STREAM_XINF: u64 = 0x03;
pub const STREAM_PROBE: u64 = 0x04;
pub const STREAM_RESIDUAL: u64 = 0x05;

/// SplitMix64 finalizer; decorrelates nearby seed/index pairs.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for stream `stream`, element `index`, derived from `seed`.
pub fn derive(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mixed = splitmix(seed ^ splitmix(stream)) ^ splitmix(index.wrapping_mul(0xa24b_aed4_963e_e407));
    ChaCha8Rng::seed_from_u64(splitmix(mixed))
}

/// Plain generator from a bare seed (single-stream uses).
pub fn from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
