//! Named random substreams derived from a single run seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub const SPLIT: &str = "split";
pub const SMOTE: &str = "smote";
pub const INIT: &str = "init";
pub const BATCHING: &str = "batching";
pub const DROPOUT: &str = "dropout";

/// A ChaCha8 generator keyed by `(seed, name)`. Distinct names give
/// independent streams; the same pair always gives the same stream.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest[..32]);
    ChaCha8Rng::from_seed(key)
}
