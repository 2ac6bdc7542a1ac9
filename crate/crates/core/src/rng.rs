//! Named random substreams derived from one root seed.
//!
//! Each stream is a ChaCha8 generator keyed by `SHA-256(root ‖ name)` and
//! positioned on `index` via the ChaCha stream id, so parallel workers can
//! each own a generator without coordinating.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn substream(root: u64, name: &str, index: u64) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(name.as_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// A fresh 64-bit seed drawn from a named substream.
pub fn derive_seed(root: u64, name: &str, index: u64) -> u64 {
    use rand::Rng;
    substream(root, name, index).random()
}
