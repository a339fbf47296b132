use alloc::vec;
use alloc::vec::Vec;

use super::{kl_bits, l1_distance, normalized, Alphabet, Pmf, Sym};
use crate::error::check_budget;
use crate::{Error, Result, EXACT_BUDGET};

/// Lexicographic ranking of `n`-tuples over an alphabet of size `base`.
///
/// The first position is the most significant digit, so rank order is the
/// lexicographic order induced by the canonical symbol order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TupleIndexer {
    base: usize,
    n: usize,
}

impl TupleIndexer {
    pub fn new(base: usize, n: usize) -> Self {
        Self { base, n }
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `base^n`, or `None` on overflow.
    pub fn count(&self) -> Option<usize> {
        self.base.checked_pow(self.n as u32)
    }

    /// `base^n` as a wide integer, for budget messages.
    pub fn count_wide(&self) -> u128 {
        let mut c: u128 = 1;
        for _ in 0..self.n {
            c = c.saturating_mul(self.base as u128);
        }
        c
    }

    pub fn rank(&self, tuple: &[Sym]) -> usize {
        tuple.iter().fold(0usize, |acc, &s| acc * self.base + s as usize)
    }

    pub fn unrank(&self, mut rank: usize, out: &mut [Sym]) {
        for slot in out.iter_mut().rev() {
            *slot = (rank % self.base) as Sym;
            rank /= self.base;
        }
    }

    pub fn tuple(&self, rank: usize) -> Vec<Sym> {
        let mut v = vec![0; self.n];
        self.unrank(rank, &mut v);
        v
    }
}

/// A pmf over `n`-tuples, indexed by lexicographic rank.
#[derive(Clone, Debug, PartialEq)]
pub struct TuplePmf {
    base: Alphabet,
    n: usize,
    mass: Vec<f64>,
}

impl TuplePmf {
    pub fn new(base: Alphabet, n: usize, mass: Vec<f64>) -> Result<Self> {
        let idx = TupleIndexer::new(base.len(), n);
        check_budget(idx.count_wide(), EXACT_BUDGET)?;
        let count = idx.count().unwrap_or(usize::MAX);
        if mass.len() != count {
            return Err(Error::LengthMismatch { expected: count, found: mass.len() });
        }
        Ok(Self { base, n, mass: normalized(mass)? })
    }

    pub(crate) fn from_parts_unchecked(base: Alphabet, n: usize, mass: Vec<f64>) -> Self {
        Self { base, n, mass }
    }

    pub fn base(&self) -> &Alphabet {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indexer(&self) -> TupleIndexer {
        TupleIndexer::new(self.base.len(), self.n)
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn prob(&self, tuple: &[Sym]) -> f64 {
        self.mass[self.indexer().rank(tuple)]
    }

    pub fn max_mass(&self) -> f64 {
        self.mass.iter().copied().fold(0.0, f64::max)
    }

    fn check(&self, other: &TuplePmf) -> Result<()> {
        if self.base != other.base || self.n != other.n {
            return Err(Error::AlphabetMismatch);
        }
        Ok(())
    }

    pub fn variational_distance(&self, other: &TuplePmf) -> Result<f64> {
        self.check(other)?;
        Ok(l1_distance(&self.mass, &other.mass))
    }

    pub fn kl_divergence(&self, other: &TuplePmf) -> Result<f64> {
        self.check(other)?;
        Ok(kl_bits(&self.mass, &other.mass))
    }
}

/// The i.i.d. extension `p^{⊗n}`, tuples in lexicographic order.
pub fn product_extend(p: &Pmf, n: usize) -> Result<TuplePmf> {
    if n == 0 {
        return Err(Error::InvalidParameter("block length must be positive".into()));
    }
    let idx = TupleIndexer::new(p.len(), n);
    check_budget(idx.count_wide(), EXACT_BUDGET)?;
    let mut mass = vec![1.0];
    for _ in 0..n {
        let mut next = Vec::with_capacity(mass.len() * p.len());
        for &m in &mass {
            next.extend(p.mass().iter().map(|&q| m * q));
        }
        mass = next;
    }
    Ok(TuplePmf::from_parts_unchecked(p.alphabet().clone(), n, mass))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_extend_examples() {
        let u = product_extend(&Pmf::from_masses(vec![0.5, 0.5]).unwrap(), 2).unwrap();
        assert_eq!(u.mass(), &[0.25; 4]);
        let d = product_extend(&Pmf::from_masses(vec![1.0, 0.0]).unwrap(), 3).unwrap();
        assert_eq!(d.prob(&[0, 0, 0]), 1.0);
        assert_eq!(d.mass().iter().filter(|&&m| m > 0.0).count(), 1);
        let s = product_extend(&Pmf::from_masses(vec![0.25, 0.75]).unwrap(), 2).unwrap();
        assert_eq!(s.mass(), &[0.0625, 0.1875, 0.1875, 0.5625]);
    }

    #[test]
    fn product_extend_budget() {
        let p = Pmf::from_masses(vec![0.5, 0.5]).unwrap();
        assert!(matches!(product_extend(&p, 23), Err(Error::BudgetExceeded { .. })));
        assert!(product_extend(&p, 22).is_ok());
    }

    #[test]
    fn rank_unrank_roundtrip() {
        let idx = TupleIndexer::new(3, 4);
        for r in 0..81 {
            assert_eq!(idx.rank(&idx.tuple(r)), r);
        }
        assert_eq!(idx.tuple(1), vec![0, 0, 0, 1]);
    }
}
