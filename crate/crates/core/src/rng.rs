//! Per-round random streams keyed by `(master_seed, stream_index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeededRng {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeededRng {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Generator for this stream; identical keys give identical draws.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.master_seed);
        r.set_stream(self.stream_index);
        r
    }

    /// Sibling stream family with an independent master seed.
    pub fn derive(&self, label: u64) -> Self {
        Self::new(sub_seed(self.master_seed, label), self.stream_index)
    }

    pub fn with_stream(&self, stream_index: u64) -> Self {
        Self::new(self.master_seed, stream_index)
    }
}

/// SplitMix64 finalizer applied to `seed ⊕ label`.
pub fn sub_seed(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
