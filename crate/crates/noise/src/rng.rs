//! Counter-based randomness.
//!
//! Every Wiener increment is addressed by `(master_seed, sample_index,
//! step_index)`.  Those coordinates are absorbed into a 256-bit ChaCha key by
//! a SplitMix64 avalanche chain, and each block of modes inside the increment
//! draws from its own ChaCha substream.  Nothing is mutated and nothing is
//! shared: any worker can synthesize any increment at any time and obtain the
//! same bits, which makes Monte Carlo averages independent of scheduling and
//! lets coupled experiments (same path, different model parameters) reuse
//! noise exactly.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Value-type handle for the randomness of one (sample, step) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseStream {
    key: [u8; 32],
}

impl NoiseStream {
    /// Derives the stream for a given sample path and time step.
    pub fn derive(master_seed: u64, sample_index: u64, step_index: u64) -> Self {
        // Domain-separation constant, then absorb each coordinate through an
        // avalanche so that neighbouring (sample, step) cells decorrelate.
        let mut h = 0x5105_0e5b_u64
            .wrapping_shl(32)
            .wrapping_add(0x9e37_79b9)
            ^ avalanche(master_seed);
        h = absorb(h, sample_index);
        h = absorb(h, step_index);
        let mut key = [0u8; 32];
        for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
            let word = avalanche(h.wrapping_add((i as u64 + 1).wrapping_mul(GOLDEN)));
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        NoiseStream { key }
    }

    /// Generator for one mode block; distinct blocks read disjoint substreams.
    pub(crate) fn block_rng(&self, block: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::from_seed(self.key);
        rng.set_stream(block);
        rng
    }
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer: a bijective 64-bit mix with full avalanche.
fn avalanche(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn absorb(h: u64, v: u64) -> u64 {
    avalanche(h ^ avalanche(v))
}
