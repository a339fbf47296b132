//! Finite-alphabet probability kernel.

mod alphabet;
mod channel;
mod coupling;
mod joint;
mod pmf;
mod sparse;
mod tuple;

pub use alphabet::Alphabet;
pub use channel::Channel;
pub use coupling::{maximal_coupling, Coupling};
pub use joint::{InfoMeasures, JointPmf};
pub use pmf::{entropy_bits, kl_bits, l1_distance, Pmf};
pub(crate) use sparse::sparse_l1;
pub use sparse::SparsePmf;
pub use tuple::{product_extend, TupleIndexer, TuplePmf};

/// A symbol, stored as its index in the canonical order of its alphabet.
pub type Sym = u16;

use crate::{Error, Result, PMF_TOLERANCE};
use alloc::vec::Vec;

/// Validates masses and renormalizes deviations within [`PMF_TOLERANCE`].
pub(crate) fn normalized(mut mass: Vec<f64>) -> Result<Vec<f64>> {
    for (index, &value) in mass.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidMass { index, value });
        }
    }
    let sum = crate::math::compensated_sum(mass.iter().copied());
    if crate::math::abs(sum - 1.0) > PMF_TOLERANCE {
        return Err(Error::NotNormalized { sum });
    }
    if sum != 1.0 {
        mass.iter_mut().for_each(|m| *m /= sum);
    }
    Ok(mass)
}
