//! Strong letter typicality with the multiplicative convention
//! `|N(a|x)/n - p(a)| <= delta * p(a)`, where zero-mass letters must not occur.
//!
//! For a joint pmf the letters are tuples of symbols, one from each sequence.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_budget, invalid};
use crate::math::{self, ln, ln_factorial};
use crate::rng::{self, StreamRng};
use crate::{stats, JointPmf, Mode, Pmf, Result, Sym, EXACT_BUDGET};

/// Slack applied to count comparisons so that exact boundary cases are typical.
const COUNT_SLACK: f64 = 1e-9;

/// A typicality test against a letter pmf, possibly over a product alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct LetterTypicality {
    delta: f64,
    dims: Vec<usize>,
    probs: Vec<f64>,
}

/// A probability with its standard error (zero for exact values).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl LetterTypicality {
    /// `delta` must be positive. Values at or above 1 remove the lower count limit.
    pub fn new(pmf: &Pmf, delta: f64) -> Result<Self> {
        Self::from_parts(vec![pmf.len()], pmf.mass().to_vec(), delta)
    }

    pub fn joint(joint: &JointPmf, delta: f64) -> Result<Self> {
        Self::from_parts(joint.dims().to_vec(), joint.mass().to_vec(), delta)
    }

    fn from_parts(dims: Vec<usize>, probs: Vec<f64>, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return invalid(alloc::format!("typicality delta must be positive, got {delta}"));
        }
        Ok(Self { delta, dims, probs })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn letter_count(&self) -> usize {
        self.probs.len()
    }

    pub fn letter_probs(&self) -> &[f64] {
        &self.probs
    }

    /// Inclusive range of counts of `letter` allowed in a typical `n`-tuple.
    /// `None` means no count is allowed (the range is empty).
    pub fn count_range(&self, letter: usize, n: usize) -> Option<(usize, usize)> {
        let p = self.probs[letter];
        if p <= 0.0 {
            return Some((0, 0));
        }
        let centre = n as f64 * p;
        let width = self.delta * centre;
        let lo = math::ceil(centre - width - COUNT_SLACK).max(0.0);
        let hi = math::floor(centre + width + COUNT_SLACK).min(n as f64);
        if lo > hi {
            None
        } else {
            Some((lo as usize, hi as usize))
        }
    }

    pub fn is_typical_counts(&self, counts: &[usize], n: usize) -> bool {
        counts.iter().enumerate().all(|(a, &c)| match self.count_range(a, n) {
            Some((lo, hi)) => lo <= c && c <= hi,
            None => false,
        })
    }

    /// Typicality of a sequence over a single alphabet.
    pub fn is_typical(&self, x: &[Sym]) -> bool {
        debug_assert_eq!(self.dims.len(), 1);
        let mut counts = vec![0usize; self.probs.len()];
        for &s in x {
            counts[s as usize] += 1;
        }
        self.is_typical_counts(&counts, x.len())
    }

    /// Joint typicality of one sequence per variable of the joint pmf.
    pub fn is_jointly_typical(&self, seqs: &[&[Sym]]) -> bool {
        assert_eq!(seqs.len(), self.dims.len(), "one sequence per variable");
        let n = seqs[0].len();
        assert!(seqs.iter().all(|s| s.len() == n), "sequences must have equal length");
        let mut counts = vec![0usize; self.probs.len()];
        for t in 0..n {
            let letter = seqs.iter().zip(&self.dims).fold(0usize, |acc, (s, &d)| acc * d + s[t] as usize);
            counts[letter] += 1;
        }
        self.is_typical_counts(&counts, n)
    }

    /// Probability that an i.i.d. `n`-tuple of letters is typical.
    ///
    /// Exact mode sums multinomial type-class masses over the typical types;
    /// Monte-Carlo mode draws `trials` tuples from `rng`.
    pub fn probability(&self, n: usize, mode: Mode, rng: Option<&mut StreamRng>) -> Result<Estimate> {
        match mode {
            Mode::Exact => self.exact_probability(n).map(|value| Estimate { value, std_error: 0.0 }),
            Mode::MonteCarlo { trials } => {
                let Some(rng) = rng else {
                    return invalid("Monte-Carlo typicality needs a random stream");
                };
                Ok(self.mc_probability(n, trials, rng))
            }
        }
    }

    fn exact_probability(&self, n: usize) -> Result<f64> {
        let mut ranges = Vec::with_capacity(self.probs.len());
        let mut work = 1u128;
        for a in 0..self.probs.len() {
            let Some(r) = self.count_range(a, n) else { return Ok(0.0) };
            work = work.saturating_mul((r.1 - r.0 + 1) as u128);
            ranges.push(r);
        }
        check_budget(work, EXACT_BUDGET)?;
        let ln_p: Vec<f64> = self.probs.iter().map(|&p| if p > 0.0 { ln(p) } else { 0.0 }).collect();
        let mut terms = Vec::new();
        let mut counts = vec![0usize; self.probs.len()];
        enumerate_types(&ranges, 0, n, &mut counts, &mut |c| {
            let mut l = ln_factorial(n);
            for (a, &k) in c.iter().enumerate() {
                if k > 0 {
                    l += k as f64 * ln_p[a] - ln_factorial(k);
                }
            }
            terms.push(math::exp(l));
        });
        Ok(math::compensated_sum(terms).min(1.0))
    }

    fn mc_probability(&self, n: usize, trials: usize, rng: &mut StreamRng) -> Estimate {
        let cdf = rng::cdf(&self.probs);
        let mut counts = vec![0usize; self.probs.len()];
        let hits: Vec<f64> = (0..trials)
            .map(|_| {
                counts.iter_mut().for_each(|c| *c = 0);
                for _ in 0..n {
                    counts[rng::sample_cdf(&cdf, rng::uniform01(rng))] += 1;
                }
                if self.is_typical_counts(&counts, n) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        Estimate { value: stats::mean(&hits), std_error: stats::std_error(&hits) }
    }
}

fn enumerate_types(
    ranges: &[(usize, usize)],
    letter: usize,
    remaining: usize,
    counts: &mut [usize],
    visit: &mut dyn FnMut(&[usize]),
) {
    if letter == ranges.len() {
        if remaining == 0 {
            visit(counts);
        }
        return;
    }
    let (lo, hi) = ranges[letter];
    // the remaining letters must be able to absorb what is left
    let rest_min: usize = ranges[letter + 1..].iter().map(|r| r.0).sum();
    let rest_max: usize = ranges[letter + 1..].iter().map(|r| r.1).sum();
    for k in lo..=hi.min(remaining) {
        let left = remaining - k;
        if left < rest_min || left > rest_max {
            continue;
        }
        counts[letter] = k;
        enumerate_types(ranges, letter + 1, left, counts, visit);
    }
    counts[letter] = 0;
}
