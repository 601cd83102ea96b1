//! Reproducible random streams.
//!
//! Every random source in the crate is a ChaCha8 generator (the `rand_chacha`
//! implementation). The 64-bit master seed is expanded into the 256-bit ChaCha key
//! with `SeedableRng::seed_from_u64` (a PCG32 expansion), and the stream id selects
//! one of the 2^64 independent ChaCha streams under that key. Both steps are fixed
//! algorithms, so a `(master_seed, stream_id)` pair names the same sequence of words
//! on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RngStream = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub const fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Same master seed, different stream.
    pub const fn with_stream(self, stream_id: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id,
        }
    }
}

pub fn rng_stream(spec: SeedSpec) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.master_seed);
    rng.set_stream(spec.stream_id);
    rng
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child master seed from `(master, index)`.
///
/// Used to give each outer replication (or each pipeline stage) its own key so that
/// scheduling order never influences which numbers a task sees.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x6A09_E667_F3BC_C908)))
}
