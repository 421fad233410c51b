//! Deterministic, index-addressable random streams.
//!
//! Every stochastic routine takes an explicit generator. Replicate `r` of an
//! experiment draws from `RngStream::new(seed).substream(r)`, so adding work
//! elsewhere never shifts another replicate's numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The generator for stream `index` under this seed.
    pub fn substream(&self, index: u64) -> Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// A child stream family keyed by `tag`, independent of the parent's substreams.
    pub fn child(&self, tag: u64) -> RngStream {
        RngStream { seed: splitmix64(self.seed ^ splitmix64(tag.wrapping_add(0x5EED))) }
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A uniform draw on the open interval (0, 1).
pub fn open01(rng: &mut Rng) -> f64 {
    use rand::Rng as _;
    rng.sample(rand::distributions::Open01)
}
