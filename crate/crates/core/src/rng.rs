//! Seed streams.
//!
//! Every random quantity is drawn from a ChaCha8 generator keyed by a master
//! seed and selected by a stream id (the ChaCha nonce). Parallel work splits
//! by stream, never by sharing a generator, so results are independent of
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type Rng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeedStream {
    master: u64,
}

impl SeedStream {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Generator for stream `id` under this master seed.
    pub fn rng(&self, id: u64) -> Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(id);
        rng
    }

    /// Independent sub-stream family, e.g. one per task or repetition.
    pub fn child(&self, id: u64) -> SeedStream {
        SeedStream::new(mix(self.master ^ mix(id.wrapping_add(0x9e37_79b9_7f4a_7c15))))
    }
}

impl From<u64> for SeedStream {
    fn from(master: u64) -> Self {
        Self::new(master)
    }
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
