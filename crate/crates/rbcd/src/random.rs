//! Counter-based seeded randomness.
//!
//! Index selection and seed derivation are stateless functions of
//! (seed, counter) so that any sample path can be replayed exactly on any
//! platform. The scheme is identified by [`INDEX_STREAM_ALGORITHM`], which is
//! persisted with every run's results.

/// Identifier of the index-stream scheme, recorded in run metadata.
pub const INDEX_STREAM_ALGORITHM: &str = "splitmix64-lemire-v1";

/// SplitMix64 finalizer. Bijective on u64, good avalanche behavior.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of child run `index` from a master seed.
///
/// Distinct indices land in distinct SplitMix64 streams, so Monte-Carlo
/// children are independent and each child is replayable in isolation.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    mix64(master_seed ^ mix64(index.wrapping_add(1)))
}

/// Uniform draw from `0..bound` at position `counter` of the stream `seed`.
///
/// Lemire multiply-shift reduction of a SplitMix64 word; the modulo bias is
/// bound/2^64 and irrelevant for any realistic block count.
pub fn uniform_index(seed: u64, counter: u64, bound: usize) -> usize {
    debug_assert!(bound >= 1);
    let word = mix64(seed ^ mix64(counter));
    ((word as u128 * bound as u128) >> 64) as usize
}
