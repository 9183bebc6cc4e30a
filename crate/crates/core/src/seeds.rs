//! One user seed, several independent random streams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Randomized components; each reads its own ChaCha stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Datagen,
    Regex,
    Kmeans,
    Splits,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Self::Datagen => 1,
            Self::Regex => 2,
            Self::Kmeans => 3,
            Self::Splits => 4,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// A single `u64` drawn from `stream`, for APIs that take a plain seed.
pub fn derive_seed(seed: u64, stream: Stream) -> u64 {
    stream_rng(seed, stream).next_u64()
}

/// Dedicated rng for fold `index` of an evaluation seeded with `seed`.
pub fn fold_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}
