use alloc::vec;
use alloc::vec::Vec;

use super::{normalized, Alphabet};
use crate::math;
use crate::rng::{self, StreamRng};
use crate::{Error, Result};

/// A probability mass function on an [`Alphabet`].
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    alphabet: Alphabet,
    mass: Vec<f64>,
}

impl Pmf {
    pub fn new(alphabet: Alphabet, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != alphabet.len() {
            return Err(Error::LengthMismatch { expected: alphabet.len(), found: mass.len() });
        }
        Ok(Self { alphabet, mass: normalized(mass)? })
    }

    /// Pmf over `Alphabet::indexed(mass.len())`.
    pub fn from_masses(mass: Vec<f64>) -> Result<Self> {
        Self::new(Alphabet::indexed(mass.len()), mass)
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let k = alphabet.len();
        Self { alphabet, mass: vec![1.0 / k as f64; k] }
    }

    pub fn point(alphabet: Alphabet, symbol: usize) -> Result<Self> {
        if symbol >= alphabet.len() {
            return Err(Error::SymbolOutOfRange { symbol, size: alphabet.len() });
        }
        let mut mass = vec![0.0; alphabet.len()];
        mass[symbol] = 1.0;
        Ok(Self { alphabet, mass })
    }

    /// Bernoulli pmf `(1 - p, p)` on `{"0", "1"}`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(Alphabet::binary(), vec![1.0 - p, p])
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.mass[symbol]
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Symbols with strictly positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.mass.len()).filter(|&i| self.mass[i] > 0.0).collect()
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.mass)
    }

    pub fn max_mass(&self) -> f64 {
        self.mass.iter().copied().fold(0.0, f64::max)
    }

    fn same_alphabet(&self, other: &Pmf) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        Ok(())
    }

    /// `Σ |p(x) - q(x)|`, in `[0, 2]`.
    pub fn variational_distance(&self, other: &Pmf) -> Result<f64> {
        self.same_alphabet(other)?;
        Ok(l1_distance(&self.mass, &other.mass))
    }

    /// `D(self ‖ other)` in bits; `+inf` when the support is not contained.
    pub fn kl_divergence(&self, other: &Pmf) -> Result<f64> {
        self.same_alphabet(other)?;
        Ok(kl_bits(&self.mass, &other.mass))
    }

    pub fn cdf(&self) -> Vec<f64> {
        rng::cdf(&self.mass)
    }

    pub fn sample(&self, rng: &mut StreamRng) -> usize {
        rng::sample_cdf(&self.cdf(), rng::uniform01(rng))
    }
}

pub fn l1_distance(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    math::compensated_sum(p.iter().zip(q).map(|(a, b)| math::abs(a - b)))
}

pub fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut terms = Vec::with_capacity(p.len());
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            terms.push(a * math::log2(a / b));
        }
    }
    math::compensated_sum(terms).max(0.0)
}

pub fn entropy_bits(p: &[f64]) -> f64 {
    math::compensated_sum(p.iter().map(|&x| math::plogp(x)))
}
