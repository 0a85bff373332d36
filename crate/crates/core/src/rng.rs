//! Reproducible random streams.
//!
//! A stream is keyed by `(seed, tag, index)`: the 256-bit ChaCha key is
//! `sha256(seed || tag)` and the index selects the ChaCha stream. Path `i` of
//! an experiment therefore sees the same numbers whatever the thread count or
//! the scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub fn stream(seed: u64, tag: &str, index: u64) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(tag.as_bytes());
    let key: [u8; 32] = h.finalize().into();
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
