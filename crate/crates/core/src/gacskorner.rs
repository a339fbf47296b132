//! Common part of a pair of correlated variables: the finest variable that is
//! a function of `X` and of `Y` almost surely.
//!
//! It is read off the connected components of the bipartite graph whose edges
//! are the support of `Q_XY`.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Alphabet, Error, JointPmf, Pmf, Result, Sym};

/// Masses at or below this are not edges of the support graph.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CommonPart {
    pub u_alphabet: Alphabet,
    /// Component of each `X` symbol; `None` for zero-mass symbols.
    pub u_of_x: Vec<Option<usize>>,
    pub u_of_y: Vec<Option<usize>>,
    pub u_pmf: Pmf,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as root so X symbols label their components
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Computes the common part of a two-variable joint pmf.
pub fn common_part(joint: &JointPmf) -> Result<CommonPart> {
    if joint.arity() != 2 {
        return Err(Error::InvalidParameter("common part needs a joint of two variables".into()));
    }
    let (kx, ky) = (joint.dims()[0], joint.dims()[1]);
    let mass = joint.mass();
    let mut uf = UnionFind((0..kx + ky).collect());
    let mut px = vec![0.0; kx];
    let mut py = vec![0.0; ky];
    for x in 0..kx {
        for y in 0..ky {
            let m = mass[x * ky + y];
            px[x] += m;
            py[y] += m;
            if m > SUPPORT_THRESHOLD {
                uf.union(x, kx + y);
            }
        }
    }
    let mut label_of_root = vec![usize::MAX; kx + ky];
    let mut u_of_x = vec![None; kx];
    let mut u_mass = Vec::new();
    for x in 0..kx {
        if px[x] <= SUPPORT_THRESHOLD {
            continue;
        }
        let r = uf.find(x);
        if label_of_root[r] == usize::MAX {
            label_of_root[r] = u_mass.len();
            u_mass.push(0.0);
        }
        u_of_x[x] = Some(label_of_root[r]);
        u_mass[label_of_root[r]] += px[x];
    }
    let u_of_y = (0..ky)
        .map(|y| {
            if py[y] <= SUPPORT_THRESHOLD {
                return None;
            }
            let l = label_of_root[uf.find(kx + y)];
            (l != usize::MAX).then_some(l)
        })
        .collect();
    let u_alphabet = Alphabet::indexed(u_mass.len());
    let u_pmf = Pmf::new(u_alphabet.clone(), u_mass)?;
    Ok(CommonPart { u_alphabet, u_of_x, u_of_y, u_pmf })
}

impl CommonPart {
    pub fn is_nontrivial(&self) -> bool {
        self.u_alphabet.len() >= 2
    }

    pub fn entropy(&self) -> f64 {
        self.u_pmf.entropy()
    }

    /// Labels a sequence of `X` symbols. Zero-mass symbols map to label 0.
    pub fn label_x(&self, x: &[Sym]) -> Vec<Sym> {
        x.iter().map(|&s| self.u_of_x[s as usize].unwrap_or(0) as Sym).collect()
    }

    pub fn label_y(&self, y: &[Sym]) -> Vec<Sym> {
        y.iter().map(|&s| self.u_of_y[s as usize].unwrap_or(0) as Sym).collect()
    }

    /// The joint pmf of `(U, X, Y)`.
    pub fn joint_with_common(&self, joint: &JointPmf) -> Result<JointPmf> {
        let (kx, ky) = (joint.dims()[0], joint.dims()[1]);
        let ku = self.u_alphabet.len();
        let mut mass = vec![0.0; ku * kx * ky];
        for x in 0..kx {
            for y in 0..ky {
                let m = joint.mass()[x * ky + y];
                if m > SUPPORT_THRESHOLD {
                    let u = self.u_of_x[x].expect("supported symbol has a label");
                    mass[(u * kx + x) * ky + y] += m;
                }
            }
        }
        JointPmf::new(vec![self.u_alphabet.clone(), joint.alphabet(0).clone(), joint.alphabet(1).clone()], mass)
    }
}
