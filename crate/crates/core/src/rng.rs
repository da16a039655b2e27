//! Seeded random streams.
//!
//! Every random draw in the crate comes from a `ChaCha8Rng` built from a
//! [`Seed`] and a stream index. Parallel work is split into fixed shards, each
//! with its own stream, so results do not depend on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Draws per Monte Carlo shard. Fixed so that sharding is independent of the
/// thread pool size.
pub const SHARD_SIZE: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Generator for the given stream index.
    pub fn stream(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }

    /// A seed derived from this one, for nested independent experiments.
    pub fn derive(self, salt: u64) -> Seed {
        // splitmix64 finalizer
        let mut z = self.0 ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }
}

impl Default for Seed {
    fn default() -> Self {
        Seed(42)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// Splits `n` draws into `(stream index, count)` shards of [`SHARD_SIZE`].
pub(crate) fn shards(n: usize) -> impl Iterator<Item = (u64, usize)> + Clone {
    let full = n / SHARD_SIZE;
    let rem = n % SHARD_SIZE;
    (0..full)
        .map(|i| (i as u64, SHARD_SIZE))
        .chain((rem > 0).then_some((full as u64, rem)))
}

/// Uniform draw on the half-open interval (0, 1].
#[inline]
pub(crate) fn open_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
