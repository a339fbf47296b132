use alloc::vec;
use alloc::vec::Vec;

use super::{entropy_bits, normalized, Alphabet, Channel, Pmf};
use crate::error::check_budget;
use crate::{Error, Result, EXACT_BUDGET};

/// A joint pmf over the product of one or more alphabets.
///
/// Masses are stored row-major with the last variable varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf {
    alphabets: Vec<Alphabet>,
    dims: Vec<usize>,
    mass: Vec<f64>,
}

/// Entropies and (conditional) mutual informations of a joint pmf, in bits.
#[derive(Clone, Debug, PartialEq)]
pub struct InfoMeasures {
    pub marginal_entropy: Vec<f64>,
    pub joint_entropy: f64,
    /// `[i][j] = H(X_i | X_j)`; the diagonal is zero.
    pub conditional_entropy: Vec<Vec<f64>>,
    /// `[i][j] = I(X_i; X_j)`; the diagonal holds `H(X_i)`.
    pub mutual_information: Vec<Vec<f64>>,
    /// `((i, j, k), I(X_i; X_j | X_k))` for `i < j`, `k ∉ {i, j}`.
    pub conditional_mutual_information: Vec<((usize, usize, usize), f64)>,
}

impl InfoMeasures {
    pub fn mi(&self, i: usize, j: usize) -> f64 {
        self.mutual_information[i][j]
    }

    pub fn cmi(&self, i: usize, j: usize, k: usize) -> Option<f64> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.conditional_mutual_information.iter().find(|(t, _)| *t == (a, b, k)).map(|(_, v)| *v)
    }
}

impl JointPmf {
    pub fn new(alphabets: Vec<Alphabet>, mass: Vec<f64>) -> Result<Self> {
        if alphabets.is_empty() {
            return Err(Error::InvalidParameter("joint pmf needs at least one variable".into()));
        }
        let dims: Vec<usize> = alphabets.iter().map(Alphabet::len).collect();
        let size = dims.iter().fold(1u128, |a, &d| a.saturating_mul(d as u128));
        check_budget(size, EXACT_BUDGET)?;
        if mass.len() as u128 != size {
            return Err(Error::LengthMismatch { expected: size as usize, found: mass.len() });
        }
        Ok(Self { alphabets, dims, mass: normalized(mass)? })
    }

    /// Joint of `(X, Y)` with `X ~ p` and `Y | X ~ ch`.
    pub fn from_input_and_channel(p: &Pmf, ch: &Channel) -> Result<Self> {
        if p.alphabet() != ch.input() {
            return Err(Error::AlphabetMismatch);
        }
        let mut mass = Vec::with_capacity(p.len() * ch.output().len());
        for x in 0..p.len() {
            mass.extend(ch.row(x).iter().map(|&q| p.prob(x) * q));
        }
        Self::new(vec![p.alphabet().clone(), ch.output().clone()], mass)
    }

    /// Joint of independent `X ~ p`, `Y ~ q`.
    pub fn independent(p: &Pmf, q: &Pmf) -> Result<Self> {
        Self::from_input_and_channel(p, &Channel::constant(p.alphabet().clone(), q))
    }

    pub fn from_pmf(p: &Pmf) -> Self {
        Self { alphabets: vec![p.alphabet().clone()], dims: vec![p.len()], mass: p.mass().to_vec() }
    }

    pub fn arity(&self) -> usize {
        self.dims.len()
    }

    pub fn alphabets(&self) -> &[Alphabet] {
        &self.alphabets
    }

    pub fn alphabet(&self, var: usize) -> &Alphabet {
        &self.alphabets[var]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Masses as a flat letter pmf over the product alphabet.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn flat_index(&self, symbols: &[usize]) -> usize {
        symbols.iter().zip(&self.dims).fold(0, |acc, (&s, &d)| acc * d + s)
    }

    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = flat % d;
            flat /= d;
        }
    }

    pub fn prob(&self, symbols: &[usize]) -> f64 {
        self.mass[self.flat_index(symbols)]
    }

    /// Smallest positive mass.
    pub fn min_support_mass(&self) -> f64 {
        self.mass.iter().copied().filter(|&m| m > 0.0).fold(f64::INFINITY, f64::min)
    }

    fn check_vars(&self, vars: &[usize]) -> Result<()> {
        for (i, &v) in vars.iter().enumerate() {
            if v >= self.arity() || vars[..i].contains(&v) {
                return Err(Error::InvalidParameter(alloc::format!("bad variable list {vars:?}")));
            }
        }
        Ok(())
    }

    /// Marginal onto `vars`, in the given order.
    pub fn marginal(&self, vars: &[usize]) -> Result<JointPmf> {
        self.check_vars(vars)?;
        if vars.is_empty() {
            return Err(Error::InvalidParameter("empty marginal".into()));
        }
        let alphabets: Vec<Alphabet> = vars.iter().map(|&v| self.alphabets[v].clone()).collect();
        let dims: Vec<usize> = vars.iter().map(|&v| self.dims[v]).collect();
        let size: usize = dims.iter().product();
        let mut mass = vec![0.0; size];
        let mut idx = vec![0usize; self.arity()];
        for (flat, &m) in self.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            self.unflatten(flat, &mut idx);
            let target = vars.iter().zip(&dims).fold(0, |acc, (&v, &d)| acc * d + idx[v]);
            mass[target] += m;
        }
        Ok(JointPmf { alphabets, dims, mass })
    }

    pub fn marginal_pmf(&self, var: usize) -> Result<Pmf> {
        let m = self.marginal(&[var])?;
        Pmf::new(m.alphabets[0].clone(), m.mass)
    }

    /// The channel `P(target | given)`. Rows for zero-mass conditions are uniform.
    pub fn conditional(&self, given: usize, target: usize) -> Result<Channel> {
        let pair = self.marginal(&[given, target])?;
        let (kg, kt) = (pair.dims[0], pair.dims[1]);
        let rows = (0..kg)
            .map(|g| {
                let row = &pair.mass[g * kt..(g + 1) * kt];
                let total: f64 = row.iter().sum();
                if total > 0.0 {
                    row.iter().map(|&m| m / total).collect()
                } else {
                    vec![1.0 / kt as f64; kt]
                }
            })
            .collect();
        Channel::new(self.alphabets[given].clone(), self.alphabets[target].clone(), rows)
    }

    /// Entropy of the marginal on `vars` (zero for the empty set).
    pub fn entropy_of(&self, vars: &[usize]) -> Result<f64> {
        if vars.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_bits(&self.marginal(vars)?.mass))
    }

    pub fn conditional_entropy(&self, target: &[usize], given: &[usize]) -> Result<f64> {
        let all = union(target, given);
        Ok((self.entropy_of(&all)? - self.entropy_of(given)?).max(0.0))
    }

    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        let ab = union(a, b);
        Ok((self.entropy_of(a)? + self.entropy_of(b)? - self.entropy_of(&ab)?).max(0.0))
    }

    pub fn conditional_mutual_information(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
        let ac = union(a, c);
        let bc = union(b, c);
        let abc = union(&ac, b);
        let v = self.entropy_of(&ac)? + self.entropy_of(&bc)? - self.entropy_of(&abc)? - self.entropy_of(c)?;
        Ok(v.max(0.0))
    }

    pub fn info_measures(&self) -> InfoMeasures {
        let k = self.arity();
        let all: Vec<usize> = (0..k).collect();
        let h = |vars: &[usize]| self.entropy_of(vars).expect("valid variables");
        let marginal_entropy: Vec<f64> = (0..k).map(|i| h(&[i])).collect();
        let mut conditional_entropy = vec![vec![0.0; k]; k];
        let mut mutual_information = vec![vec![0.0; k]; k];
        for i in 0..k {
            mutual_information[i][i] = marginal_entropy[i];
            for j in 0..k {
                if i != j {
                    let hij = h(&[i, j]);
                    conditional_entropy[i][j] = (hij - marginal_entropy[j]).max(0.0);
                    mutual_information[i][j] = (marginal_entropy[i] + marginal_entropy[j] - hij).max(0.0);
                }
            }
        }
        let mut conditional_mutual_information = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                for c in 0..k {
                    if c != i && c != j {
                        let v = self.conditional_mutual_information(&[i], &[j], &[c]).expect("valid variables");
                        conditional_mutual_information.push(((i, j, c), v));
                    }
                }
            }
        }
        InfoMeasures {
            marginal_entropy,
            joint_entropy: h(&all),
            conditional_entropy,
            mutual_information,
            conditional_mutual_information,
        }
    }

    /// Appends a new variable produced by passing variable `attach_to` through `ch`.
    pub fn compose_and_marginalize(&self, ch: &Channel, attach_to: usize) -> Result<JointPmf> {
        if attach_to >= self.arity() {
            return Err(Error::InvalidParameter(alloc::format!("no variable {attach_to}")));
        }
        if ch.input() != &self.alphabets[attach_to] {
            return Err(Error::AlphabetMismatch);
        }
        let ko = ch.output().len();
        let size = (self.mass.len() as u128) * ko as u128;
        check_budget(size, EXACT_BUDGET)?;
        let mut mass = Vec::with_capacity(self.mass.len() * ko);
        let mut idx = vec![0usize; self.arity()];
        for (flat, &m) in self.mass.iter().enumerate() {
            self.unflatten(flat, &mut idx);
            mass.extend(ch.row(idx[attach_to]).iter().map(|&q| m * q));
        }
        let mut alphabets = self.alphabets.clone();
        alphabets.push(ch.output().clone());
        let mut dims = self.dims.clone();
        dims.push(ko);
        Ok(JointPmf { alphabets, dims, mass })
    }
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v = a.to_vec();
    for &x in b {
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::h2;

    fn dsbs(p: f64) -> JointPmf {
        JointPmf::from_input_and_channel(&Pmf::uniform(Alphabet::binary()), &Channel::bsc(p).unwrap()).unwrap()
    }

    #[test]
    fn independent_uniform_pair() {
        let u = Pmf::uniform(Alphabet::binary());
        let m = JointPmf::independent(&u, &u).unwrap().info_measures();
        assert!(m.mi(0, 1).abs() < 1e-12);
        assert!((m.marginal_entropy[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn copy_has_one_bit() {
        let m = dsbs(0.0).info_measures();
        assert!((m.mi(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dsbs_against_direct_summation() {
        let j = dsbs(0.1);
        // direct summation over the four joint entries
        let p = [0.45, 0.05, 0.05, 0.45];
        let mut direct = 0.0;
        for (k, &pxy) in p.iter().enumerate() {
            direct += pxy * libm::log2(pxy / (0.5 * 0.5));
            let _ = k;
        }
        let mi = j.info_measures().mi(0, 1);
        assert!((mi - direct).abs() < 1e-12);
        assert!((mi - (1.0 - h2(0.1))).abs() < 1e-12);
    }

    #[test]
    fn compose_examples() {
        let base = JointPmf::from_pmf(&Pmf::from_masses(vec![0.2, 0.8]).unwrap());
        let id = base.compose_and_marginalize(&Channel::identity(Alphabet::indexed(2)), 0).unwrap();
        assert_eq!(id.mass(), &[0.2, 0.0, 0.0, 0.8]);
        let r = Pmf::from_masses(vec![0.3, 0.7]).unwrap();
        let c = base.compose_and_marginalize(&Channel::constant(Alphabet::indexed(2), &r), 0).unwrap();
        assert!(c.info_measures().mi(0, 1) < 1e-12);
        let m = c.marginal_pmf(1).unwrap();
        assert!((m.prob(0) - 0.3).abs() < 1e-15);
        let back = c.marginal(&[0]).unwrap();
        assert!((back.mass()[0] - 0.2).abs() < 1e-15);
        let j = dsbs(0.1).marginal_pmf(1).unwrap();
        assert!((j.prob(0) - 0.5).abs() < 1e-15);
        let bad = base.compose_and_marginalize(&Channel::identity(Alphabet::indexed(3)), 0);
        assert_eq!(bad, Err(Error::AlphabetMismatch));
    }

    #[test]
    fn conditional_rows() {
        let c = dsbs(0.1).conditional(0, 1).unwrap();
        assert!((c.prob(0, 1) - 0.1).abs() < 1e-15);
    }
}
