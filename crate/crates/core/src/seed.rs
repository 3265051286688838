//! Deterministic seed derivation.
//!
//! Every stochastic stage (splits, bootstraps, weight init, dropout, corpus
//! synthesis) draws from a substream derived from one root seed and a stream
//! label, so parallel and serial execution produce identical results and a
//! single `--seed` flag reproduces an entire run.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over the label bytes. Stable across platforms and Rust versions,
/// unlike `DefaultHasher`.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a child seed for the substream `label[index]` of `root`.
pub fn derive_seed(root: u64, label: &str, index: u64) -> u64 {
    splitmix64(root ^ splitmix64(fnv1a(label.as_bytes())) ^ splitmix64(index.wrapping_add(1)))
}

/// Seeded RNG for the substream `label[index]` of `root`.
pub fn substream(root: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, label, index))
}
