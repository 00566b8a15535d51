//! Deterministic seed derivation for named substreams.
//!
//! All randomness in the crate flows from one master seed; substreams are
//! derived by mixing stable tags into it, so generation order (or
//! parallel scheduling) cannot change what any cell or component draws.

/// SplitMix64 finalizer; a full-avalanche 64-bit mixer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over bytes; stable across platforms and runs (unlike the
/// standard library's randomized hasher).
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seed for the substream identified by `tag` under `master`.
pub fn substream(master: u64, tag: &str) -> u64 {
    splitmix64(master ^ fnv1a64(tag.as_bytes()))
}

/// Seed for a keyed cell within a tagged substream.
pub fn keyed_substream(master: u64, tag: &str, key: &str) -> u64 {
    splitmix64(substream(master, tag) ^ fnv1a64(key.as_bytes()))
}
