//! Seeded, splittable random streams.
//!
//! Every stream is ChaCha8 keyed by `seed_from_u64(seed)` with the stream
//! number selecting an independent keystream. Samplers switch to a new
//! stream every [`BLOCK`] points, so block `b` of a sequence can be
//! generated on any thread and the result does not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GENERATOR_ID: &str = "chacha8-rand_chacha-0.9/seed_from_u64/stream-per-4096";

pub const BLOCK: usize = 4096;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derived seed for a labelled sub-computation (experiment cell, trial, ...).
pub fn sub_seed(seed: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(seed), |acc, &l| splitmix64(acc ^ splitmix64(l)))
}
