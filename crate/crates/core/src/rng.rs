//! Deterministic random streams.
//!
//! Every chain, replication and rung draws from its own ChaCha8 stream. A
//! stream is identified by a root seed and a stream index: the root seed keys
//! the generator and the index selects the ChaCha stream (`set_stream`), so
//! streams with distinct indices never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SamplerRng = ChaCha8Rng;

/// Stream used by a single chain driven by [`crate::hmc::run_chain`].
pub const CHAIN_STREAM: u64 = 0;
/// Stream reserved for replica-exchange and rung-move proposals.
pub const EXCHANGE_STREAM: u64 = u64::MAX;

pub fn stream_rng(seed: u64, stream: u64) -> SamplerRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives the seed of child `index` from a root seed (SplitMix64 finalizer).
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root
        .wrapping_add(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
