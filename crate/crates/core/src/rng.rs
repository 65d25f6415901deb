//! Counter-based seeding.
//!
//! A [`Seed`] is a `(root, stream)` pair. Every replica, block or restart
//! derives its own seed from its index, so results never depend on the order
//! in which parallel workers pick up work.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub root: u64,
    pub stream: u64,
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Seed {
    pub fn new(root: u64) -> Self {
        Seed { root, stream: 0 }
    }

    pub fn with_stream(root: u64, stream: u64) -> Self {
        Seed { root, stream }
    }

    /// Seed for child `index` of this seed: `stream = hash(root, stream, index)`.
    pub fn child(&self, index: u64) -> Seed {
        let s = mix64(mix64(self.root ^ mix64(self.stream)) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03));
        Seed { root: self.root, stream: s }
    }

    /// Independent sub-family, used to keep e.g. jitter draws apart from sampling draws.
    pub fn fork(&self, label: u64) -> Seed {
        Seed { root: self.root, stream: mix64(self.stream ^ mix64(label ^ 0x5eed)) }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.root.to_le_bytes());
        key[8..16].copy_from_slice(&mix64(self.root).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream);
        rng
    }
}
