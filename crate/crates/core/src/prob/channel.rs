use alloc::vec;
use alloc::vec::Vec;

use super::{normalized, Alphabet, Pmf};
use crate::math;
use crate::{Error, Result};

/// A discrete memoryless channel: one output pmf per input symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    input: Alphabet,
    output: Alphabet,
    rows: Vec<f64>,
}

impl Channel {
    pub fn new(input: Alphabet, output: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != input.len() {
            return Err(Error::LengthMismatch { expected: input.len(), found: rows.len() });
        }
        let mut flat = Vec::with_capacity(input.len() * output.len());
        for row in rows {
            if row.len() != output.len() {
                return Err(Error::LengthMismatch { expected: output.len(), found: row.len() });
            }
            flat.extend(normalized(row)?);
        }
        Ok(Self { input, output, rows: flat })
    }

    pub fn identity(alphabet: Alphabet) -> Self {
        let k = alphabet.len();
        let mut rows = vec![0.0; k * k];
        for i in 0..k {
            rows[i * k + i] = 1.0;
        }
        Self { input: alphabet.clone(), output: alphabet, rows }
    }

    /// Every input maps to the same output pmf.
    pub fn constant(input: Alphabet, row: &Pmf) -> Self {
        let mut rows = Vec::with_capacity(input.len() * row.len());
        for _ in 0..input.len() {
            rows.extend_from_slice(row.mass());
        }
        Self { input, output: row.alphabet().clone(), rows }
    }

    /// Binary symmetric channel on `{"0", "1"}` with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Self::new(Alphabet::binary(), Alphabet::binary(), vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn prob(&self, input: usize, output: usize) -> f64 {
        self.rows[input * self.output.len() + output]
    }

    pub fn row(&self, input: usize) -> &[f64] {
        let k = self.output.len();
        &self.rows[input * k..(input + 1) * k]
    }

    /// True when every row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        (0..self.input.len()).all(|x| self.row(x).iter().filter(|&&p| p > 0.0).count() == 1)
    }

    /// Distribution of the output when the input is drawn from `p`.
    pub fn output_pmf(&self, p: &Pmf) -> Result<Pmf> {
        if p.alphabet() != &self.input {
            return Err(Error::AlphabetMismatch);
        }
        let k = self.output.len();
        let mut out = vec![0.0; k];
        for (x, &px) in p.mass().iter().enumerate() {
            for (y, o) in out.iter_mut().enumerate() {
                *o += px * self.prob(x, y);
            }
        }
        Pmf::new(self.output.clone(), out)
    }

    /// The channel `self` followed by `next`.
    pub fn cascade(&self, next: &Channel) -> Result<Channel> {
        if self.output != next.input {
            return Err(Error::AlphabetMismatch);
        }
        let rows = (0..self.input.len())
            .map(|x| {
                (0..next.output.len())
                    .map(|z| math::compensated_sum((0..self.output.len()).map(|y| self.prob(x, y) * next.prob(y, z))))
                    .collect()
            })
            .collect();
        Channel::new(self.input.clone(), next.output.clone(), rows)
    }
}
