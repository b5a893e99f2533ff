//! Counter-based seed derivation.
//!
//! Every random quantity in a run is drawn from its own stream, keyed by a
//! master seed, a purpose label and up to two indices. A stream's contents
//! depend only on that key, so results do not depend on how work is scheduled
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for all streams.
pub type Stream = ChaCha8Rng;

/// Purpose labels for derived streams.
pub mod purpose {
    pub const PROJECTION: &str = "projection";
    pub const SPLIT: &str = "split";
    pub const REGRESSOR: &str = "regressor";
    pub const NULL_RESAMPLE: &str = "null-resample";
    pub const DIMENSION: &str = "dimension";
    pub const STAGE2: &str = "stage2";
    pub const DATA: &str = "data";
    pub const METHOD: &str = "method";
}

/// Derive a 64-bit seed from `(master, label, a, b)`.
pub fn derive_seed(master: u64, label: &str, a: u64, b: u64) -> u64 {
    let mut h = mix64(master ^ 0x243F_6A88_85A3_08D3);
    h = mix64(h ^ fnv1a64(label.as_bytes()));
    h = mix64(h ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    mix64(h ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F))
}

/// Open the stream keyed by `(master, label, a, b)`.
pub fn stream(master: u64, label: &str, a: u64, b: u64) -> Stream {
    let seed = derive_seed(master, label, a, b);
    let mut key = [0u8; 32];
    let mut s = seed;
    for chunk in key.chunks_mut(8) {
        s = mix64(s.wrapping_add(0x9E37_79B9_7F4A_7C15));
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// A stream seeded directly from a 64-bit seed.
pub fn seeded(seed: u64) -> Stream {
    stream(seed, "root", 0, 0)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
