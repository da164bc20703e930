//! Reproducible random streams.
//!
//! A [`RandomStream`] is an immutable `(seed, stream_index)` token. Every
//! consumer turns it into a fresh ChaCha8 generator whose 64-bit stream id is
//! the index, so path `k` of a batch can be generated on any thread without
//! skipping through the draws of paths `0..k`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Generator type handed out by [`RandomStream::rng`].
pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// The stream `offset` positions further along under the same seed.
    pub fn nth(&self, offset: u64) -> Self {
        Self {
            seed: self.seed,
            stream_index: self.stream_index.wrapping_add(offset),
        }
    }

    /// A stream family keyed by a different seed, used to keep batches that
    /// must be independent (e.g. reference draws vs. path draws) apart.
    pub fn reseed(&self, salt: u64) -> Self {
        Self {
            seed: self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            stream_index: self.stream_index,
        }
    }
}
