//! Seed splitting.
//!
//! Every random stream in the toolkit is derived from one master seed and a
//! label. The derived seed is the first eight bytes (little endian) of
//! `SHA-256(master_le || label || 0x00 || index_le)`. Labels name the module
//! and purpose, e.g. `"covering/draw"`, so two streams never collide unless
//! they share both label and index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn derive(master: u64, label: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update([0u8]);
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng(master: u64, label: &str, index: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(derive(master, label, index))
}
