//! Deterministic, hierarchically derived random streams.
//!
//! Every consumer of randomness takes an explicit [`Stream`]. Child streams
//! are pure functions of the parent key and an index, so replication `r` or
//! resample `b` sees the same numbers no matter which worker runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Key identifying an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Stream {
    key: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Stream {
    pub fn from_seed(seed: u64) -> Self {
        Stream {
            key: splitmix64(seed ^ 0x005E_ED0F_1A2B_3C4D),
        }
    }

    /// Child stream `index` of this stream.
    pub fn child(&self, index: u64) -> Stream {
        Stream {
            key: splitmix64(self.key ^ splitmix64(index.wrapping_add(0xA076_1D64_78BD_642F))),
        }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.key)
    }

    pub fn key(&self) -> u64 {
        self.key
    }
}
