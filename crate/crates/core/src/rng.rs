//! Named, counter-based random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded by
//! [`stream_seed`], which mixes a root seed, a stream name and an index. Adding
//! trials or runs never perturbs the streams of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(name: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in name.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Derives the seed of sub-stream `(name, index)` of `root`.
pub fn stream_seed(root: u64, name: &str, index: u64) -> u64 {
    let named = splitmix64(root ^ splitmix64(fnv1a(name)));
    splitmix64(named ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

pub fn stream_rng(root: u64, name: &str, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(stream_seed(root, name, index))
}

pub fn rng_from_seed(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
