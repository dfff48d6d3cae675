//! Seed derivation. Every random quantity in a simulation comes from a
//! ChaCha stream keyed by `(master seed, purpose, index)`, so channel draws
//! never shift when, say, the interleaver or prior generator changes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tag for an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Code = 1,
    Interleaver = 2,
    Message = 3,
    Channel = 4,
    Noise = 5,
    Priors = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a 64-bit sub-seed for `(stream, index)` under `master`.
pub fn sub_seed(master: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream as u64)) ^ index)
}

/// Generator for one `(stream, index)` pair.
pub fn stream_rng(master: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(master, stream, index));
    rng.set_stream(stream as u64);
    rng
}
