use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result, PMF_TOLERANCE};

/// A pmf over `0..size` stored as sorted `(index, mass)` pairs with positive mass.
///
/// Posteriors over codebook indices live here: the index set is large, the
/// support is small.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePmf {
    size: usize,
    entries: Vec<(usize, f64)>,
}

impl SparsePmf {
    /// Builds from unnormalized nonnegative weights; duplicate indices are merged.
    pub fn from_weights(size: usize, mut weights: Vec<(usize, f64)>) -> Result<Self> {
        for &(index, value) in &weights {
            if index >= size {
                return Err(Error::SymbolOutOfRange { symbol: index, size });
            }
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidMass { index, value });
            }
        }
        weights.retain(|&(_, w)| w > 0.0);
        weights.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(weights.len());
        for (i, w) in weights {
            match entries.last_mut() {
                Some((j, acc)) if *j == i => *acc += w,
                _ => entries.push((i, w)),
            }
        }
        let total = math::compensated_sum(entries.iter().map(|e| e.1));
        if total <= 0.0 {
            return Err(Error::NotNormalized { sum: total });
        }
        entries.iter_mut().for_each(|e| e.1 /= total);
        Ok(Self { size, entries })
    }

    /// Like [`from_weights`](Self::from_weights) but rejects weights not summing to 1.
    pub fn new(size: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        let total = math::compensated_sum(entries.iter().map(|e| e.1));
        if math::abs(total - 1.0) > PMF_TOLERANCE {
            return Err(Error::NotNormalized { sum: total });
        }
        Self::from_weights(size, entries)
    }

    pub fn uniform_over(size: usize, indices: &[usize]) -> Result<Self> {
        Self::from_weights(size, indices.iter().map(|&i| (i, 1.0)).collect())
    }

    pub fn uniform(size: usize) -> Self {
        let w = 1.0 / size as f64;
        Self { size, entries: (0..size).map(|i| (i, w)).collect() }
    }

    pub fn point(size: usize, index: usize) -> Self {
        Self { size, entries: alloc::vec![(index, 1.0)] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn prob(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |e| e.0) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = alloc::vec![0.0; self.size];
        for &(i, m) in &self.entries {
            v[i] = m;
        }
        v
    }

    /// `Σ |p - q|` where `other` is given as sorted `(index, mass)` pairs
    /// that need not sum to one.
    pub fn l1_to(&self, other: &[(usize, f64)]) -> f64 {
        sparse_l1(&self.entries, other)
    }
}

impl From<&super::Pmf> for SparsePmf {
    fn from(p: &super::Pmf) -> Self {
        let entries = p.mass().iter().enumerate().filter(|e| *e.1 > 0.0).map(|(i, &m)| (i, m)).collect();
        Self { size: p.len(), entries }
    }
}

/// L1 distance between two sorted sparse vectors.
pub(crate) fn sparse_l1(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut terms = Vec::with_capacity(a.len() + b.len());
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => break,
            (Some(&(ia, ma)), Some(&(ib, mb))) => {
                if ia == ib {
                    terms.push(math::abs(ma - mb));
                    i += 1;
                    j += 1;
                } else if ia < ib {
                    terms.push(ma);
                    i += 1;
                } else {
                    terms.push(mb);
                    j += 1;
                }
            }
            (Some(&(_, ma)), None) => {
                terms.push(ma);
                i += 1;
            }
            (None, Some(&(_, mb))) => {
                terms.push(mb);
                j += 1;
            }
        }
    }
    math::compensated_sum(terms)
}
