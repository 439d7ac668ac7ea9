//! Named random substreams.
//!
//! Every stochastic process draws from its own stream, seeded from `(seed, process-name)`.
//! Consuming one stream never shifts another, so adding draws to (say) trip sampling
//! leaves adoption timing untouched.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub const ADOPTION: &str = "adoption";
pub const MODEL_CHOICE: &str = "model-choice";
pub const TRIPS: &str = "trips";
pub const BASELOAD: &str = "baseload";
pub const SPOT: &str = "spot";
pub const CO2: &str = "co2";

#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, process: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(process.as_bytes());
        let digest: [u8; 32] = hasher.finalize().into();
        RngStream {
            inner: ChaCha8Rng::from_seed(digest),
        }
    }

    /// Stream for one member of a process, e.g. the trips of household 17.
    pub fn for_member(seed: u64, process: &str, member: u32) -> Self {
        Self::new(seed, &format!("{process}/{member}"))
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
