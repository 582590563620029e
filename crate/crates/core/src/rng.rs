//! Seed handling.
//!
//! Every stochastic operation takes a [`Seed`]. Independent streams for
//! replicates, chunks and generations are obtained with [`Seed::derive`],
//! which mixes the parent seed with a tag through the SplitMix64 finalizer,
//! so results never depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator used throughout the crate.
pub type LabRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Seed {
    /// Child seed for stream `tag`.
    pub fn derive(self, tag: u64) -> Seed {
        Seed(mix64(self.0 ^ mix64(tag.wrapping_add(0x9e37_79b9_7f4a_7c15))))
    }

    /// Child seed for a two-level tag such as (replicate, chunk).
    pub fn derive2(self, a: u64, b: u64) -> Seed {
        self.derive(a).derive(b)
    }

    pub fn rng(self) -> LabRng {
        LabRng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}
