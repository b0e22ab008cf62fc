//! Counter-addressed uniform draws.
//!
//! Every draw is a pure function of `(seed, stream, index)`, so datasets can
//! be generated in any order (or in parallel) and still match bit for bit.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream carrying latent event-time uniforms.
pub const EVENT_STREAM: u64 = 0;
/// Stream carrying censoring-time uniforms.
pub const CENSOR_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Raw 64 bits addressed by `(stream, index)`.
    pub fn bits(&self, stream: u64, index: u64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng.set_word_pos(u128::from(index) * 2);
        rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&self, stream: u64, index: u64) -> f64 {
        (self.bits(stream, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Independent child seed for replication `index`.
    pub fn child_seed(&self, index: u64) -> u64 {
        // stream 2^32 is reserved for seed derivation
        self.bits(1 << 32, index)
    }
}
