//! Stable seed derivation.
//!
//! A derived seed is FNV-1a (64-bit) over the base seed's little-endian bytes
//! followed by each label's bytes and a `0xff` separator, passed through the
//! splitmix64 finalizer. Labels identify purpose, task and repetition, so the
//! seed of a piece of work never depends on execution order.

/// Identifier reported in run headers.
pub const SEED_ALGORITHM: &str = "fnv1a64 + splitmix64 finalizer";

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn derive_seed(base: u64, labels: &[&str]) -> u64 {
    let mut h = FNV_OFFSET;
    let mut eat = |b: u8| {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    };
    base.to_le_bytes().into_iter().for_each(&mut eat);
    for label in labels {
        label.bytes().for_each(&mut eat);
        eat(0xff);
    }
    splitmix64(h)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
