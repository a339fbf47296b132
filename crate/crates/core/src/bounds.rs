//! Closed-form finite-n bounds, evaluated so simulations can be checked against them.

use crate::math;

/// `log2(1 + 2^t)` without overflow for large `t`.
pub fn log2_one_plus_exp2(t: f64) -> f64 {
    if t > 60.0 {
        t + math::log2(1.0 + math::exp2(-t))
    } else {
        math::log2(1.0 + math::exp2(t))
    }
}

/// Inputs for [`eval_bounds`].
#[derive(Clone, Debug, PartialEq)]
pub struct BoundInputs {
    pub n: usize,
    pub delta: f64,
    /// Smallest positive mass of the joint pmf the typicality argument runs over.
    pub mu: f64,
    /// `(|X|, |Y|, |U|)` for the superposition KL bound.
    pub sizes_xyu: (usize, usize, usize),
    pub i_xy_given_u: f64,
    /// Inner binning rate `R_x'` of the superposition code.
    pub rate_x_prime: f64,
    /// `(|A|, |B|)` for the list-size bound.
    pub sizes_ab: (usize, usize),
    pub i_ab: f64,
    /// Rate of the codebook whose list is counted.
    pub list_rate: f64,
    /// Mass outside the seeded sampler's head, its head size and seed size.
    pub epsilon: f64,
    pub head_size: usize,
    pub ell: usize,
    /// Variational distance between the two pmfs being coupled.
    pub variational: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRecord {
    pub kl_gap_bound: f64,
    pub list_size_bound: f64,
    pub sampler_bound: f64,
    pub coupling_bound: f64,
}

impl BoundRecord {
    /// The list-size bound is evaluated with `+2δ·log2(|A||B|)` in the exponent.
    pub const LIST_SIZE_SIGN: &'static str = "+";

    pub fn fields(&self) -> [(&'static str, f64); 4] {
        [
            ("kl_gap_bound", self.kl_gap_bound),
            ("list_size_bound", self.list_size_bound),
            ("sampler_bound", self.sampler_bound),
            ("coupling_bound", self.coupling_bound),
        ]
    }
}

/// Upper bound on the per-block KL gap of the superposition code.
pub fn kl_gap_bound(n: usize, delta: f64, mu: f64, sizes: (usize, usize, usize), i_xy_given_u: f64, rate_x_prime: f64) -> f64 {
    let nf = n as f64;
    let (x, y, u) = sizes;
    let main = log2_one_plus_exp2(nf * (i_xy_given_u - rate_x_prime + 2.0 * delta * math::log2(y as f64)));
    let atypical = 2.0 * (x * y * u) as f64 * math::exp(-nf * delta * delta * mu);
    main + atypical * log2_one_plus_exp2(-nf * math::log2(mu))
}

/// Upper bound on the expected list size of jointly typical codewords.
pub fn list_size_bound(n: usize, delta: f64, rate: f64, i_ab: f64, sizes: (usize, usize)) -> f64 {
    math::exp2(1.0 + n as f64 * (rate - i_ab + 2.0 * delta * math::log2((sizes.0 * sizes.1) as f64)))
}

pub fn sampler_bound(epsilon: f64, head_size: usize, ell: usize) -> f64 {
    epsilon + head_size as f64 / ell as f64
}

/// Mismatch probability of a maximal coupling at variational distance `v`.
pub fn coupling_bound(v: f64) -> f64 {
    v / 2.0
}

pub fn eval_bounds(b: &BoundInputs) -> BoundRecord {
    BoundRecord {
        kl_gap_bound: kl_gap_bound(b.n, b.delta, b.mu, b.sizes_xyu, b.i_xy_given_u, b.rate_x_prime),
        list_size_bound: list_size_bound(b.n, b.delta, b.list_rate, b.i_ab, b.sizes_ab),
        sampler_bound: sampler_bound(b.epsilon, b.head_size, b.ell),
        coupling_bound: coupling_bound(b.variational),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kl_gap_vanishes_above_the_threshold() {
        let mut last = f64::INFINITY;
        for n in [1000, 2000, 4000, 8000, 16000] {
            let b = kl_gap_bound(n, 0.05, 1.0, (2, 2, 2), 0.3, 0.5);
            assert!(b < last);
            last = b;
        }
        assert!(last < 1e-15, "{last}");
        // huge exponents stay finite
        assert!(kl_gap_bound(10_000, 0.1, 1e-3, (4, 4, 2), 1.0, 0.2).is_finite());
    }

    #[test]
    fn list_size_at_the_threshold() {
        assert_eq!(list_size_bound(17, 0.0, 0.531, 0.531, (2, 2)), 2.0);
        assert!(list_size_bound(10, 0.1, 0.5, 0.5, (2, 2)) > 2.0);
    }

    #[test]
    fn sampler_matches_the_three_seed_example() {
        assert!((sampler_bound(0.0, 2, 3) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(coupling_bound(0.4), 0.2);
    }
}
