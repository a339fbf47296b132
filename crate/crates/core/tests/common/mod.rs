//! Random instance generators and brute-force oracles shared by the
//! integration tests and the acceptance suite.
#![allow(dead_code)]

use nusc_core::rng::{self, StreamRng};
use nusc_core::seed::SeededSampler;
use nusc_core::{Alphabet, JointPmf, Pmf, SparsePmf};

pub fn rng(tag: &str) -> StreamRng {
    rng::stream(0x5eed, tag, 0)
}

pub fn u01(r: &mut StreamRng) -> f64 {
    rng::uniform01(r)
}

pub fn below(r: &mut StreamRng, k: usize) -> usize {
    ((u01(r) * k as f64) as usize).min(k - 1)
}

pub fn between(r: &mut StreamRng, lo: usize, hi: usize) -> usize {
    lo + below(r, hi - lo + 1)
}

/// Positive weights of at least 1e-3 relative size, each zeroed with probability `zeros`;
/// at least one entry stays positive.
pub fn random_masses(r: &mut StreamRng, k: usize, zeros: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k).map(|_| if u01(r) < zeros { 0.0 } else { 1e-3 + u01(r) }).collect();
    if w.iter().all(|&x| x == 0.0) {
        w[below(r, k)] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

pub fn random_pmf(r: &mut StreamRng, k: usize, zeros: f64) -> Pmf {
    Pmf::from_masses(random_masses(r, k, zeros)).unwrap()
}

pub fn random_joint(r: &mut StreamRng, dims: &[usize], zeros: f64) -> JointPmf {
    let total = dims.iter().product();
    JointPmf::new(dims.iter().map(|&k| Alphabet::indexed(k)).collect(), random_masses(r, total, zeros)).unwrap()
}

/// A joint on `ka × kb` whose support sits inside randomly placed matching blocks,
/// possibly sparser than the blocks themselves.
pub fn block_structured_joint(r: &mut StreamRng, ka: usize, kb: usize) -> JointPmf {
    let blocks = between(r, 1, ka.min(kb));
    let assign = |r: &mut StreamRng, k: usize| {
        // every block gets at least one symbol
        let mut a: Vec<usize> = (0..k).map(|i| if i < blocks { i } else { below(r, blocks) }).collect();
        for i in (1..k).rev() {
            a.swap(i, below(r, i + 1));
        }
        a
    };
    let (ba, bb) = (assign(r, ka), assign(r, kb));
    let sparse = u01(r) * 0.4;
    let mut m = vec![0.0; ka * kb];
    for a in 0..ka {
        for b in 0..kb {
            if ba[a] == bb[b] && u01(r) >= sparse {
                m[a * kb + b] = 1e-3 + u01(r);
            }
        }
    }
    if m.iter().all(|&x| x == 0.0) {
        m[0] = 1.0;
    }
    let s: f64 = m.iter().sum();
    let m = m.iter().map(|x| x / s).collect();
    JointPmf::new(vec![Alphabet::indexed(ka), Alphabet::indexed(kb)], m).unwrap()
}

/// Every set partition of `0..k` as a restricted growth string.
pub fn set_partitions(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, max: usize, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=max + 1 {
            prefix.push(c);
            go(prefix, max.max(c), k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        out.push(Vec::new());
    } else {
        let mut p = vec![0];
        go(&mut p, 0, k, &mut out);
    }
    out
}

/// Brute-force common part: among all partitions of the `X` support that are
/// also functions of `Y` on the joint support, the finest one. Returns its
/// classes (sorted) and its entropy.
pub fn gk_oracle(j: &JointPmf) -> (Vec<Vec<usize>>, f64) {
    let (ka, kb) = (j.dims()[0], j.dims()[1]);
    let edge = |a: usize, b: usize| j.prob(&[a, b]) > 1e-12;
    let px: Vec<f64> = (0..ka).map(|a| (0..kb).map(|b| j.prob(&[a, b])).sum()).collect();
    let support: Vec<usize> = (0..ka).filter(|&a| (0..kb).any(|b| edge(a, b))).collect();
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut ties = 0;
    for labels in set_partitions(support.len()) {
        let label = |a: usize| labels[support.iter().position(|&s| s == a).unwrap()];
        // a function of Y must give every y one label
        let valid = (0..kb).all(|b| {
            let mut seen = None;
            support.iter().filter(|&&a| edge(a, b)).all(|&a| match seen {
                None => {
                    seen = Some(label(a));
                    true
                }
                Some(l) => l == label(a),
            })
        });
        if !valid {
            continue;
        }
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        match &best {
            Some((c, _)) if *c > classes => {}
            Some((c, _)) if *c == classes => ties += 1,
            _ => {
                best = Some((classes, labels.clone()));
                ties = 0;
            }
        }
    }
    assert_eq!(ties, 0, "finest common partition must be unique");
    let (classes, labels) = best.unwrap();
    let mut sets = vec![Vec::new(); classes];
    let mut mass = vec![0.0; classes];
    for (i, &a) in support.iter().enumerate() {
        sets[labels[i]].push(a);
        mass[labels[i]] += px[a];
    }
    sets.sort();
    let h = -mass.iter().filter(|&&m| m > 0.0).map(|&m| m * m.log2()).sum::<f64>();
    (sets, h)
}

/// `max_S p(S) - q(S)`: no coupling of `p` and `q` mismatches less often.
pub fn coupling_lower_bound(p: &[f64], q: &[f64]) -> f64 {
    let k = p.len();
    (0u32..1 << k)
        .map(|s| (0..k).filter(|&i| s >> i & 1 == 1).map(|i| p[i] - q[i]).sum::<f64>())
        .fold(0.0, f64::max)
}

/// North-west corner coupling of `p` and `q` after permuting both alphabets by `perm`.
pub fn corner_coupling_mismatch(p: &[f64], q: &[f64], perm: &[usize]) -> f64 {
    let k = p.len();
    let (mut a, mut b) = (p.to_vec(), q.to_vec());
    let (mut i, mut j) = (0, 0);
    let mut diag = 0.0;
    while i < k && j < k {
        let (x, y) = (perm[i], perm[j]);
        let m = a[x].min(b[y]);
        if x == y {
            diag += m;
        }
        a[x] -= m;
        b[y] -= m;
        if a[x] <= 1e-15 {
            i += 1;
        }
        if b[y] <= 1e-15 {
            j += 1;
        }
    }
    1.0 - diag
}

/// A random sparse target, seed size and head set for the seeded sampler.
pub fn sampler_instance(r: &mut StreamRng) -> (SparsePmf, usize, Vec<usize>) {
    let size = between(r, 1, 40);
    let masses = random_masses(r, size, 0.3);
    let entries: Vec<(usize, f64)> = masses.iter().copied().enumerate().filter(|e| e.1 > 0.0).collect();
    let target = SparsePmf::new(size, entries.clone()).unwrap();
    let ell = between(r, 1, 1024);
    let head: Vec<usize> = match below(r, 3) {
        0 => entries.iter().map(|e| e.0).collect(),
        1 => {
            let mut h: Vec<usize> = entries.iter().map(|e| e.0).filter(|_| u01(r) < 0.6).collect();
            if h.is_empty() {
                h.push(entries[0].0);
            }
            h
        }
        // any symbols, including zero-mass ones
        _ => {
            let mut h: Vec<usize> = (0..size).filter(|_| u01(r) < 0.5).collect();
            if h.is_empty() {
                h.push(below(r, size));
            }
            h
        }
    };
    (target, ell, head)
}

/// Checks a sampler's cuts and table against the interval construction and
/// returns `(distance, bound, max deviation)` of the construction measure.
pub fn sampler_oracle(s: &SeededSampler, target: &SparsePmf, head: &[usize]) -> (f64, f64, f64) {
    let ell = s.seed_size();
    let mut head = head.to_vec();
    head.sort_unstable();
    head.dedup();
    let cuts = s.cuts();
    assert_eq!(cuts.len(), head.len());
    let mut cum = 0.0;
    let mut prev = 0;
    for (&b, &n) in head.iter().zip(cuts) {
        cum += target.prob(b);
        let exact = cum * ell as f64;
        // N_i = floor(p_i ℓ), up to summation rounding at integer boundaries
        assert!(n as f64 <= exact + 1e-6 && n as f64 > exact - 1.0 - 1e-6, "cut {n} vs {exact}");
        assert!(n >= prev && n <= ell);
        prev = n;
    }
    let table = s.table();
    let mut lo = 0;
    for (&b, &n) in head.iter().zip(cuts) {
        assert!(table[lo..n].iter().all(|&t| t == b));
        lo = n;
    }
    assert!(table[lo..].iter().all(|&t| t == head[0]));
    let mut q = vec![0.0; target.size()];
    let mut lo = 0;
    for (&b, &n) in head.iter().zip(cuts) {
        q[b] += (n - lo) as f64 / ell as f64;
        lo = n;
    }
    let inside: f64 = head.iter().map(|&b| target.prob(b)).sum();
    let eps = (1.0 - inside).max(0.0);
    let dist: f64 = (0..target.size()).map(|b| (q[b] - target.prob(b)).abs()).sum();
    let dev = head.iter().map(|&b| (q[b] - target.prob(b)).abs()).fold(0.0, f64::max);
    (dist, eps + head.len() as f64 / ell as f64, dev)
}

/// The block-diagonal source: two 2×2 blocks with masses 0.6 and 0.4, uniform inside.
pub fn block_diag() -> JointPmf {
    let mut m = vec![0.0; 16];
    for x in 0..4 {
        for y in 0..4 {
            if x / 2 == y / 2 {
                m[x * 4 + y] = [0.6, 0.4][x / 2] / 4.0;
            }
        }
    }
    JointPmf::new(vec![Alphabet::indexed(4), Alphabet::indexed(4)], m).unwrap()
}

pub fn dsbs(p: f64) -> JointPmf {
    JointPmf::new(vec![Alphabet::binary(), Alphabet::binary()], vec![(1.0 - p) / 2.0, p / 2.0, p / 2.0, (1.0 - p) / 2.0]).unwrap()
}
