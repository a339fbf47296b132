//! Counter-based random streams.
//!
//! A stream is a ChaCha20 generator whose 256-bit key is
//! `SHA-256("nusc-stream-v1" || master || len(purpose) || purpose || index)`
//! with integers little-endian. Any two distinct `(master, purpose, index)`
//! triples give independent streams, so work can be split across threads
//! without changing results.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha20Rng;

fn key(master: u64, purpose: &str, index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"nusc-stream-v1");
    h.update(master.to_le_bytes());
    h.update((purpose.len() as u64).to_le_bytes());
    h.update(purpose.as_bytes());
    h.update(index.to_le_bytes());
    h.finalize().into()
}

pub fn stream(master: u64, purpose: &str, index: u64) -> StreamRng {
    ChaCha20Rng::from_seed(key(master, purpose, index))
}

/// A derived 64-bit seed, e.g. for sweep points.
pub fn sub_seed(master: u64, purpose: &str, index: u64) -> u64 {
    let k = key(master, purpose, index);
    let mut b = [0u8; 8];
    b.copy_from_slice(&k[..8]);
    u64::from_le_bytes(b)
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn uniform01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF sampling: the first index whose cumulative mass exceeds `u`.
///
/// `cdf` is nondecreasing; draws beyond the last entry (rounding) return the
/// last index with positive mass.
pub fn sample_cdf(cdf: &[f64], u: f64) -> usize {
    let idx = cdf.partition_point(|&c| c <= u);
    if idx < cdf.len() {
        idx
    } else {
        let last = *cdf.last().expect("nonempty cdf");
        cdf.iter().position(|&c| c >= last).unwrap_or(cdf.len() - 1)
    }
}

/// Cumulative sums of `mass`.
pub fn cdf(mass: &[f64]) -> alloc::vec::Vec<f64> {
    let mut acc = 0.0;
    mass.iter()
        .map(|&m| {
            acc += m;
            acc
        })
        .collect()
}
