//! Reproducible random streams.
//!
//! Replicas draw from ChaCha8 keyed by the master seed and separated by the
//! generator's native 64-bit stream counter, so distinct `stream_id`s under
//! one master seed are independent keystreams by construction. The 256-bit
//! key is expanded from the 64-bit master seed with SplitMix64 (Steele,
//! Lea & Flood's avalanche mixer). Same `(master_seed, stream_id)` always
//! reproduces the same draws for a fixed crate version.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Handle naming one reproducible stream: `(master_seed, stream_id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Materialize the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = self.master_seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// One SplitMix64 step: advances `state` by the golden-ratio increment and
/// returns the finalized output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_stream_reproduces_bitwise() {
        let a: Vec<u64> = RngStream::new(42, 7).rng().sample_iter(rand::distributions::Standard).take(64).collect();
        let b: Vec<u64> = RngStream::new(42, 7).rng().sample_iter(rand::distributions::Standard).take(64).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_and_seeds_separate() {
        let base: Vec<u64> = RngStream::new(42, 0).rng().sample_iter(rand::distributions::Standard).take(16).collect();
        let other_stream: Vec<u64> =
            RngStream::new(42, 1).rng().sample_iter(rand::distributions::Standard).take(16).collect();
        let other_seed: Vec<u64> =
            RngStream::new(43, 0).rng().sample_iter(rand::distributions::Standard).take(16).collect();
        assert_ne!(base, other_stream);
        assert_ne!(base, other_seed);
    }

    #[test]
    fn splitmix_reference_vector() {
        // first three outputs for seed 0, per the reference implementation
        let mut s = 0u64;
        assert_eq!(splitmix64(&mut s), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(&mut s), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(splitmix64(&mut s), 0x06C4_5D18_8009_454F);
    }
}
