//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream whose key is
//! the master seed and whose 64-bit stream id is a hash of a domain tag and
//! up to three indices (trial, block, receiver, codeword, ...). Draws
//! therefore depend only on their coordinates, never on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose of a stream; keeps streams for different roles disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Input = 1,
    Output = 2,
    Cloud = 3,
    Satellite = 4,
    Message = 5,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for `(seed, domain, a, b, c)`.
pub fn stream(seed: u64, domain: Domain, a: u64, b: u64, c: u64) -> StreamRng {
    let mut key = [0u8; 32];
    let mut s = seed;
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut id = splitmix64(domain as u64);
    for v in [a, b, c] {
        id = splitmix64(id ^ v);
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(id);
    rng
}
