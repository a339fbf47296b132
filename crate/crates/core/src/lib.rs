//! Simulation kernel for near-uniform source coding over finite alphabets.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every algorithmic piece:
//!
//! - [`prob`]: pmfs, channels, joint pmfs, information measures, couplings;
//! - [`typicality`]: strong letter typicality and typical-set probabilities;
//! - [`gacskorner`]: the common part of a joint pmf;
//! - [`seed`]: pmf emulation from a uniform seed, intrinsic-randomness extraction,
//!   and per-condition emulators used to make every encoder deterministic;
//! - [`codebook`]: flat and superposition random codebooks, induced output
//!   distributions, resolvability and KL gaps, list sizes;
//! - [`wz`], [`sw`], [`dlc`]: the three coding schemes and their metrics;
//! - [`bounds`]: closed-form finite-n bounds.
//!
//! All entropies and rates are in bits. Randomness only enters through
//! explicit [`rng::StreamRng`] values derived from a master seed, so every
//! result is reproducible.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod codebook;
pub mod dlc;
mod error;
pub mod gacskorner;
pub mod math;
pub mod prob;
pub mod rng;
pub mod seed;
pub mod stats;
pub mod sw;
pub mod typicality;
pub mod wz;

pub use error::{Error, Result};
pub use prob::{Alphabet, Channel, JointPmf, Pmf, SparsePmf, Sym, TupleIndexer, TuplePmf};

/// Tolerance used for pmf normalization and marginal consistency.
pub const PMF_TOLERANCE: f64 = 1e-9;

/// Largest dense table (pmf tensor, tuple pmf, type enumeration) built in exact mode.
pub const EXACT_BUDGET: usize = 1 << 22;

/// Largest codebook, counted in stored symbols.
pub const CODEBOOK_BUDGET: usize = 1 << 24;

/// Evaluation mode for quantities that can be computed exactly or estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    MonteCarlo { trials: usize },
}
