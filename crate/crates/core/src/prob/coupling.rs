use alloc::vec;

use super::{JointPmf, Pmf};
use crate::math;
use crate::{Error, Result};

/// A joint pmf on `A × A` with prescribed marginals.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    pub left: Pmf,
    pub right: Pmf,
    pub joint: JointPmf,
}

impl Coupling {
    /// `P[left ≠ right]`.
    pub fn mismatch_probability(&self) -> f64 {
        let k = self.left.len();
        let m = self.joint.mass();
        math::compensated_sum((0..k).flat_map(|a| (0..k).filter(move |&b| b != a).map(move |b| m[a * k + b])))
    }
}

/// The maximal coupling of `p` and `q`.
///
/// The diagonal carries `min(p, q)`; the excess of `p` over `q` is spread over
/// the excess of `q` over `p` proportionally, so `P[left ≠ right] = V(p, q) / 2`.
pub fn maximal_coupling(p: &Pmf, q: &Pmf) -> Result<Coupling> {
    if p.alphabet() != q.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let k = p.len();
    let mut mass = vec![0.0; k * k];
    let mut excess_p = vec![0.0; k];
    let mut excess_q = vec![0.0; k];
    for a in 0..k {
        let (pa, qa) = (p.prob(a), q.prob(a));
        let m = pa.min(qa);
        mass[a * k + a] = m;
        excess_p[a] = pa - m;
        excess_q[a] = qa - m;
    }
    let tv = math::compensated_sum(excess_p.iter().copied());
    if tv > 0.0 {
        for a in 0..k {
            if excess_p[a] == 0.0 {
                continue;
            }
            for b in 0..k {
                mass[a * k + b] += excess_p[a] * excess_q[b] / tv;
            }
        }
    }
    let joint = JointPmf::new(vec![p.alphabet().clone(), q.alphabet().clone()], mass)?;
    Ok(Coupling { left: p.clone(), right: q.clone(), joint })
}
