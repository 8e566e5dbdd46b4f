//! Named, independent random streams derived from one 64-bit seed.
//!
//! A stream key is `SHA-256(seed || name)`; the key seeds a ChaCha8
//! generator, whose output is a pure function of key and block counter on
//! every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

/// Seed plus a way to derive named substreams from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seeds {
    pub seed: u64,
}

impl Seeds {
    pub fn new(seed: u64) -> Self {
        Seeds { seed }
    }

    pub fn stream(&self, name: &str) -> StreamRng {
        substream(self.seed, name)
    }

    /// Stream for `name` at position `index` (an epoch, a sample id, ...).
    pub fn indexed(&self, name: &str, index: u64) -> StreamRng {
        substream(self.seed, &format!("{name}/{index}"))
    }

    pub fn init(&self) -> StreamRng {
        self.stream("init")
    }

    pub fn batching(&self, epoch: u64) -> StreamRng {
        self.indexed("batching", epoch)
    }

    pub fn collocation(&self, epoch: u64) -> StreamRng {
        self.indexed("collocation", epoch)
    }

    pub fn grf(&self, function: u64) -> StreamRng {
        self.indexed("grf", function)
    }
}

pub fn seed_everything(seed: u64) -> Seeds {
    Seeds::new(seed)
}

pub fn substream(seed: u64, name: &str) -> StreamRng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}
