//! Distributed lossless coding of `(X, Y)` with jointly nearly uniform
//! encoder outputs, for sources with a non-trivial common part `U`.
//!
//! Both encoders see `U^n` (it is a function of either source) and pick the
//! same cloud index `I`. The X encoder sends the row `J` of its satellite
//! `x(I, J, K)`; the Y encoder sends `(I, L)`. The decoder recovers `y(I, L)`
//! and searches the columns `K` of row `J` for a word jointly typical with it.
//!
//! Every index is drawn by a seeded sampler from the uniform distribution over
//! exactly matching codewords. The three seeds come from three consecutive
//! segments of `s = ceil(3εn/H(U))` extra symbols: `U` labels, then `X`, then `Y`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::codebook::{dimension, gen_superposition, Dimension, SuperCodebook, SuperDims};
use crate::error::{check_budget, invalid};
use crate::gacskorner::{common_part, CommonPart};
use crate::math;
use crate::rng::{self, StreamRng};
use crate::seed::{extract_intrinsic, EmulatorAudit, Extractor, HeadRule, SeededSampler};
use crate::typicality::LetterTypicality;
use crate::{stats, Error, JointPmf, Mode, Pmf, Result, SparsePmf, Sym, TupleIndexer, EXACT_BUDGET};

#[derive(Clone, Debug, PartialEq)]
pub struct SwConfig {
    /// Joint of `(X, Y)`.
    pub source: JointPmf,
    pub epsilon: f64,
    pub n: usize,
    /// Typicality level of the decoder's search.
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwDerived {
    pub common: CommonPart,
    /// Joint of `(U, X, Y)`.
    pub uxy: JointPmf,
    pub h_u: f64,
    pub h_x_given_y: f64,
    pub i_xy_given_u: f64,
    pub h_y_given_u: f64,
    pub i_xy: f64,
    /// `H(U) + ε/2`.
    pub u_rows: Dimension,
    /// `H(X|Y) + ε/2`.
    pub x_rows: Dimension,
    /// `I(X;Y|U) + ε/2`.
    pub x_cols: Dimension,
    /// `H(Y|U) + ε/2`.
    pub y_rows: Dimension,
    /// Length of each seed segment.
    pub seed_len: usize,
    /// `n + 3 · seed_len`.
    pub total_len: usize,
    /// `round(2^{2nε})`.
    pub seed_bins: usize,
}

impl SwDerived {
    pub fn dims(&self) -> SuperDims {
        SuperDims { u_rows: self.u_rows.size, x_rows: self.x_rows.size, x_cols: self.x_cols.size, y_rows: self.y_rows.size }
    }

    /// Size of the joint output index set `J × I × L`.
    pub fn output_size(&self) -> u128 {
        self.x_rows.size as u128 * self.u_rows.size as u128 * self.y_rows.size as u128
    }
}

impl SwConfig {
    pub fn derive(&self) -> Result<SwDerived> {
        if self.source.arity() != 2 {
            return invalid("source must be a joint of (X, Y)");
        }
        if self.n == 0 {
            return invalid("n must be positive");
        }
        let common = common_part(&self.source)?;
        if !common.is_nontrivial() {
            return Err(Error::TrivialCommonPart);
        }
        let uxy = common.joint_with_common(&self.source)?;
        let h_u = common.entropy();
        if !(self.epsilon > 0.0 && self.epsilon < h_u) {
            return invalid(format!("epsilon must lie in (0, H(U)) = (0, {h_u}), got {}", self.epsilon));
        }
        let h_x_given_y = uxy.conditional_entropy(&[1], &[2])?;
        let i_xy_given_u = uxy.conditional_mutual_information(&[1], &[2], &[0])?;
        let h_y_given_u = uxy.conditional_entropy(&[2], &[0])?;
        let i_xy = uxy.mutual_information(&[1], &[2])?;
        let half = self.epsilon / 2.0;
        if i_xy_given_u + half >= i_xy {
            return invalid(format!("R_x' = {} must stay below I(X;Y) = {i_xy}", i_xy_given_u + half));
        }
        let n = self.n;
        let seed_len = math::snapped_ceil(3.0 * self.epsilon * n as f64 / h_u) as usize;
        Ok(SwDerived {
            h_u,
            h_x_given_y,
            i_xy_given_u,
            h_y_given_u,
            i_xy,
            u_rows: dimension(n, h_u + half),
            x_rows: dimension(n, h_x_given_y + half),
            x_cols: dimension(n, i_xy_given_u + half),
            y_rows: dimension(n, h_y_given_u + half),
            seed_len,
            total_len: n + 3 * seed_len,
            seed_bins: math::index_set_size(n, 2.0 * self.epsilon),
            common,
            uxy,
        })
    }

    /// The same problem with the roles of `X` and `Y` exchanged (the other corner point).
    pub fn swapped(&self) -> Result<SwConfig> {
        Ok(SwConfig { source: self.source.marginal(&[1, 0])?, ..self.clone() })
    }
}

#[derive(Clone, Debug)]
pub struct SwCode {
    pub config: SwConfig,
    pub derived: SwDerived,
    pub scb: SuperCodebook,
    u_index: BTreeMap<Vec<Sym>, Vec<usize>>,
    ext_u: Extractor,
    ext_x: Extractor,
    ext_y: Extractor,
    typ: LetterTypicality,
    pair_cdf: Vec<f64>,
}

pub fn sw_build(config: &SwConfig, master: u64, codebook_index: u64) -> Result<SwCode> {
    let derived = config.derive()?;
    let scb = gen_superposition(&derived.uxy, config.n, derived.dims(), master, &format!("sw/{codebook_index}"))?;
    SwCode::with_codebook(config, derived, scb)
}

/// Outcome of an index draw: the index and whether the fallback was taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Draw {
    pub index: usize,
    pub fallback: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct XEncoding {
    pub i: Draw,
    pub j: usize,
    pub k: usize,
    pub jk_fallback: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct YEncoding {
    pub i: Draw,
    pub l: usize,
    pub l_fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwDecoding {
    pub x_hat: Vec<Sym>,
    pub y_hat: Vec<Sym>,
    pub k: usize,
    /// Number of columns whose word was typical with `y_hat`.
    pub matches: usize,
}

impl SwDecoding {
    pub fn ambiguous(&self) -> bool {
        self.matches != 1
    }
}

fn uniform_sampler(size: usize, matches: &[usize], seed_bins: usize) -> SeededSampler {
    let t = SparsePmf::uniform_over(size, matches).expect("nonempty match set");
    SeededSampler::from_rule(&t, seed_bins, &HeadRule::default()).expect("nonempty head")
}

/// Indices of each distinct word in a flat word list.
fn index_words(words: &[Sym], n: usize) -> BTreeMap<&[Sym], Vec<usize>> {
    let mut map: BTreeMap<&[Sym], Vec<usize>> = BTreeMap::new();
    for (w, word) in words.chunks(n).enumerate() {
        map.entry(word).or_default().push(w);
    }
    map
}

/// `derived` with its index sets replaced by `dims`.
fn resized(mut derived: SwDerived, n: usize, dims: SuperDims) -> SwDerived {
    let fixed = |size: usize| Dimension { rate: math::log2(size as f64) / n as f64, ideal: size as f64, size };
    derived.u_rows = fixed(dims.u_rows);
    derived.x_rows = fixed(dims.x_rows);
    derived.x_cols = fixed(dims.x_cols);
    derived.y_rows = fixed(dims.y_rows);
    derived
}

/// Every length-`n` sequence over `k` letters whose labels under `label` equal `u`.
fn sequences_over(k: usize, n: usize, u: &[Sym], label: &[Option<usize>]) -> Vec<Vec<Sym>> {
    let ix = TupleIndexer::new(k, n);
    (0..ix.count().expect("small exhaustive codebook"))
        .map(|r| ix.tuple(r))
        .filter(|t| t.iter().zip(u).all(|(&a, &c)| label[a as usize] == Some(c as usize)))
        .collect()
}

impl SwCode {
    /// Wraps an existing superposition codebook, e.g. an exhaustive one.
    pub fn with_codebook(config: &SwConfig, derived: SwDerived, scb: SuperCodebook) -> Result<SwCode> {
        let mut u_index: BTreeMap<Vec<Sym>, Vec<usize>> = BTreeMap::new();
        for i in 0..scb.dims().u_rows {
            u_index.entry(scb.u_word(i).to_vec()).or_default().push(i);
        }
        let s = derived.seed_len;
        let b = derived.seed_bins;
        let ext_u = extract_intrinsic(&derived.common.u_pmf, s, b)?;
        let ext_x = extract_intrinsic(&config.source.marginal_pmf(0)?, s, b)?;
        let ext_y = extract_intrinsic(&config.source.marginal_pmf(1)?, s, b)?;
        let typ = LetterTypicality::joint(&config.source, config.delta)?;
        Ok(SwCode {
            pair_cdf: rng::cdf(config.source.mass()),
            config: config.clone(),
            derived,
            scb,
            u_index,
            ext_u,
            ext_x,
            ext_y,
            typ,
        })
    }

    /// A code on an independently drawn codebook with index sets `dims`
    /// instead of the configured ones.
    pub fn with_dims(config: &SwConfig, dims: SuperDims, master: u64, codebook_index: u64) -> Result<SwCode> {
        let derived = resized(config.derive()?, config.n, dims);
        let scb = gen_superposition(&derived.uxy, config.n, dims, master, &format!("sw/{codebook_index}"))?;
        SwCode::with_codebook(config, derived, scb)
    }

    /// The code whose tiers list every sequence once: all label sequences as
    /// cloud centres and, in each cloud, every consistent `x^n` as its own row
    /// (one column) and every consistent `y^n`. Clouds with fewer consistent
    /// sequences than the largest repeat their last word.
    pub fn exhaustive(config: &SwConfig) -> Result<SwCode> {
        let derived = config.derive()?;
        let n = config.n;
        let cp = &derived.common;
        let ku = cp.u_alphabet.len();
        let (kx, ky) = (config.source.dims()[0], config.source.dims()[1]);
        check_budget(TupleIndexer::new(kx.max(ky), n).count_wide() * 2, EXACT_BUDGET)?;
        let iu = TupleIndexer::new(ku, n);
        let centres: Vec<Vec<Sym>> = (0..iu.count().expect("within budget")).map(|r| iu.tuple(r)).collect();
        let xs: Vec<Vec<Vec<Sym>>> = centres.iter().map(|u| sequences_over(kx, n, u, &cp.u_of_x)).collect();
        let ys: Vec<Vec<Vec<Sym>>> = centres.iter().map(|u| sequences_over(ky, n, u, &cp.u_of_y)).collect();
        let x_rows = xs.iter().map(Vec::len).max().unwrap_or(1);
        let y_rows = ys.iter().map(Vec::len).max().unwrap_or(1);
        let flatten = |clouds: &[Vec<Vec<Sym>>], rows: usize| -> Vec<Sym> {
            let mut out = Vec::with_capacity(clouds.len() * rows * n);
            for c in clouds {
                for w in 0..rows {
                    out.extend_from_slice(&c[w.min(c.len() - 1)]);
                }
            }
            out
        };
        let dims = SuperDims { u_rows: centres.len(), x_rows, x_cols: 1, y_rows };
        let scb = SuperCodebook::from_words(
            n,
            [cp.u_alphabet.clone(), config.source.alphabet(0).clone(), config.source.alphabet(1).clone()],
            dims,
            centres.concat(),
            flatten(&xs, x_rows),
            flatten(&ys, y_rows),
        )?;
        SwCode::with_codebook(config, resized(derived, n, dims), scb)
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn total_len(&self) -> usize {
        self.derived.total_len
    }

    fn segment<'a>(&self, seq: &'a [Sym], which: usize) -> &'a [Sym] {
        let (n, s) = (self.n(), self.derived.seed_len);
        &seq[n + which * s..n + (which + 1) * s]
    }

    fn check_len(&self, seq: &[Sym]) -> Result<()> {
        if seq.len() != self.total_len() {
            return Err(Error::LengthMismatch { expected: self.total_len(), found: seq.len() });
        }
        Ok(())
    }

    /// Sampler for the cloud index given `u^n`, or `None` when no cloud centre matches.
    pub fn cloud_sampler(&self, u: &[Sym]) -> Option<SeededSampler> {
        self.u_index.get(u).map(|m| uniform_sampler(self.scb.dims().u_rows, m, self.derived.seed_bins))
    }

    fn draw_cloud(&self, u: &[Sym], u_seed_labels: &[Sym]) -> Draw {
        match self.cloud_sampler(u) {
            Some(s) => Draw { index: s.lookup(self.ext_u.bin(u_seed_labels)), fallback: false },
            None => Draw { index: 0, fallback: true },
        }
    }

    fn draw_in(&self, words: &[Sym], target: &[Sym], seed: usize) -> (usize, bool) {
        let n = self.n();
        let matches: Vec<usize> = words.chunks(n).enumerate().filter(|(_, w)| *w == target).map(|(i, _)| i).collect();
        if matches.is_empty() {
            return (0, true);
        }
        (uniform_sampler(words.len() / n, &matches, self.derived.seed_bins).lookup(seed), false)
    }

    pub fn encode_x(&self, x: &[Sym]) -> Result<XEncoding> {
        self.check_len(x)?;
        let n = self.n();
        let cp = &self.derived.common;
        let i = self.draw_cloud(&cp.label_x(&x[..n]), &cp.label_x(self.segment(x, 0)));
        let seed = self.ext_x.bin(self.segment(x, 1));
        let (w, jk_fallback) = self.draw_in(&self.scb.x_cloud(i.index), &x[..n], seed);
        let cols = self.scb.dims().x_cols;
        Ok(XEncoding { i, j: w / cols, k: w % cols, jk_fallback })
    }

    pub fn encode_y(&self, y: &[Sym]) -> Result<YEncoding> {
        self.check_len(y)?;
        let n = self.n();
        let cp = &self.derived.common;
        let i = self.draw_cloud(&cp.label_y(&y[..n]), &cp.label_y(self.segment(y, 0)));
        let seed = self.ext_y.bin(self.segment(y, 2));
        let (l, l_fallback) = self.draw_in(&self.scb.y_cloud(i.index), &y[..n], seed);
        Ok(YEncoding { i, l, l_fallback })
    }

    pub fn decode(&self, j: usize, i: usize, l: usize) -> SwDecoding {
        let y_hat = self.scb.y_word(i, l);
        let cloud = self.scb.x_cloud(i);
        let (n, cols) = (self.n(), self.scb.dims().x_cols);
        let row = &cloud[j * cols * n..(j + 1) * cols * n];
        let hits: Vec<usize> =
            (0..cols).filter(|&k| self.typ.is_jointly_typical(&[&row[k * n..(k + 1) * n], &y_hat])).collect();
        let k = if hits.len() == 1 { hits[0] } else { 0 };
        SwDecoding { x_hat: row[k * n..(k + 1) * n].to_vec(), y_hat, k, matches: hits.len() }
    }

    /// Draws an extended source block of `total_len` pairs.
    pub fn sample_source(&self, r: &mut StreamRng) -> (Vec<Sym>, Vec<Sym>) {
        let ky = self.config.source.dims()[1];
        (0..self.total_len())
            .map(|_| {
                let letter = rng::sample_cdf(&self.pair_cdf, rng::uniform01(r));
                ((letter / ky) as Sym, (letter % ky) as Sym)
            })
            .unzip()
    }
}

/// Outcome of one source trial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwTrial {
    pub j: usize,
    pub i: usize,
    pub l: usize,
    pub block_error: bool,
    pub fallback: bool,
    pub ambiguous: bool,
    /// Per-position recovery of `(x_t, y_t)` over the first `n` symbols.
    pub recovered: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwMetrics {
    /// `V((J, I, L) pmf, uniform on J × I × L)`.
    pub joint_uniformity_v: f64,
    pub uniformity_exact: bool,
    pub uniformity_undersampled: bool,
    pub block_err: f64,
    pub encoder_fallback_rate: f64,
    pub decode_ambiguity_rate: f64,
    pub dims: SuperDims,
    pub seed_bins: usize,
    pub total_len: usize,
    pub audit: EmulatorAudit,
}

/// `Σ_{j,l} |w·a_j·b_l - c|` over the positive entries of `a` and `b`.
fn product_l1(w: f64, a: &[f64], b_sorted: &[f64], b_prefix: &[f64], c: f64) -> f64 {
    let total = *b_prefix.last().unwrap_or(&0.0);
    let cnt = b_sorted.len() as f64;
    let terms = a.iter().map(|&aj| {
        let s = w * aj;
        let split = b_sorted.partition_point(|&b| s * b <= c);
        let below = b_prefix[split];
        let k = split as f64;
        // cells below the level contribute c - s·b, the others s·b - c
        (c * k - s * below) + (s * (total - below) - c * (cnt - k))
    });
    math::compensated_sum(terms)
}

fn prefix(sorted: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(sorted.len() + 1);
    p.push(0.0);
    let mut acc = 0.0;
    for &v in sorted {
        acc += v;
        p.push(acc);
    }
    p
}

impl SwCode {
    /// Whether `X ⊥ Y | U` letterwise, which makes the exact joint uniformity tractable.
    pub fn conditionally_independent(&self) -> bool {
        let uxy = &self.derived.uxy;
        let (ku, kx, ky) = (uxy.dims()[0], uxy.dims()[1], uxy.dims()[2]);
        let pu = uxy.marginal(&[0]).expect("valid");
        let ux = uxy.marginal(&[0, 1]).expect("valid");
        let uy = uxy.marginal(&[0, 2]).expect("valid");
        (0..ku).all(|u| {
            let m = pu.mass()[u];
            (0..kx).all(|x| {
                (0..ky).all(|y| {
                    let lhs = uxy.prob(&[u, x, y]) * m;
                    let rhs = ux.prob(&[u, x]) * uy.prob(&[u, y]);
                    math::abs(lhs - rhs) <= 1e-12
                })
            })
        })
    }

    /// `P(index | cloud i, centre u)` for a tier: iterate the distinct words of the cloud.
    fn tier_distribution(
        &self,
        words: &[Sym],
        centre: &[Sym],
        cond: &crate::Channel,
        seed_pmf: &[f64],
        audit: &mut EmulatorAudit,
    ) -> Vec<f64> {
        let n = self.n();
        let size = words.len() / n;
        let mut dist = vec![0.0; size];
        let mut covered = Vec::new();
        for (word, matches) in index_words(words, n) {
            let p: f64 = word.iter().zip(centre).map(|(&x, &u)| cond.prob(u as usize, x as usize)).product();
            if p == 0.0 {
                continue;
            }
            covered.push(p);
            let s = uniform_sampler(size, &matches, self.derived.seed_bins);
            audit.record(&s);
            for (seed, &ps) in seed_pmf.iter().enumerate() {
                dist[s.lookup(seed)] += p * ps;
            }
        }
        dist[0] += (1.0 - math::compensated_sum(covered)).max(0.0);
        dist
    }

    /// Exact `V` of `(J, I, L)` against uniform. Needs `X ⊥ Y | U`.
    pub fn exact_joint_uniformity(&self, audit: &mut EmulatorAudit) -> Result<f64> {
        if !self.conditionally_independent() {
            return invalid("exact joint uniformity needs X and Y independent given U; use Monte-Carlo mode");
        }
        let d = self.scb.dims();
        let work = (d.u_rows as u128) * ((d.x_rows * d.x_cols + d.y_rows) as u128);
        check_budget(work, EXACT_BUDGET.saturating_mul(4))?;
        let c = 1.0 / self.derived.output_size() as f64;
        let u_pmf = &self.derived.common.u_pmf;
        let uxy = &self.derived.uxy;
        let x_given_u = uxy.conditional(0, 1)?;
        let y_given_u = uxy.conditional(0, 2)?;
        let mut weight = vec![0.0; d.u_rows];
        let mut covered = Vec::new();
        for (u, matches) in &self.u_index {
            let p: f64 = u.iter().map(|&s| u_pmf.prob(s as usize)).product();
            covered.push(p);
            let s = uniform_sampler(d.u_rows, matches, self.derived.seed_bins);
            audit.record(&s);
            for (seed, &ps) in self.ext_u.bin_pmf().iter().enumerate() {
                weight[s.lookup(seed)] += p * ps;
            }
        }
        let unmatched = (1.0 - math::compensated_sum(covered)).max(0.0);
        let mut terms = Vec::new();
        let mut support = 0u128;
        for (i, &w) in weight.iter().enumerate() {
            if w == 0.0 && !(i == 0 && unmatched > 0.0) {
                continue;
            }
            let centre = self.scb.u_word(i).to_vec();
            let x_cloud = self.scb.x_cloud(i);
            let jk = self.tier_distribution(&x_cloud, &centre, &x_given_u, self.ext_x.bin_pmf(), audit);
            // J is the row of (j, k)
            let mut a = vec![0.0; d.x_rows];
            for (w_idx, &m) in jk.iter().enumerate() {
                a[w_idx / d.x_cols] += m;
            }
            let b = self.tier_distribution(&self.scb.y_cloud(i), &centre, &y_given_u, self.ext_y.bin_pmf(), audit);
            let a_pos: Vec<f64> = a.iter().copied().filter(|&v| v > 0.0).collect();
            let mut b_pos: Vec<f64> = b.iter().copied().filter(|&v| v > 0.0).collect();
            b_pos.sort_by(f64::total_cmp);
            if w > 0.0 {
                terms.push(product_l1(w, &a_pos, &b_pos, &prefix(&b_pos), c));
                support += a_pos.len() as u128 * b_pos.len() as u128;
            }
            if i == 0 && unmatched > 0.0 {
                // blocks without a matching centre land on cell (0, 0, 0)
                let base = w * a[0] * b[0];
                if base > 0.0 {
                    terms.push(math::abs(base + unmatched - c) - math::abs(base - c));
                } else {
                    terms.push(math::abs(unmatched - c));
                    support += 1;
                }
            }
        }
        let empty = self.derived.output_size() - support;
        terms.push(empty as f64 * c);
        Ok(math::compensated_sum(terms))
    }

    /// Runs one source trial from stream `(master, "sw/source/<codebook>", trial)`.
    pub fn trial(&self, master: u64, codebook_index: u64, trial: u64) -> SwTrial {
        let mut r = rng::stream(master, &format!("sw/source/{codebook_index}"), trial);
        let (x, y) = self.sample_source(&mut r);
        self.run(&x, &y)
    }

    pub fn run(&self, x: &[Sym], y: &[Sym]) -> SwTrial {
        let n = self.n();
        let ex = self.encode_x(x).expect("configured length");
        let ey = self.encode_y(y).expect("configured length");
        assert_eq!(ex.i, ey.i, "encoders disagree on the cloud index");
        let dec = self.decode(ex.j, ey.i.index, ey.l);
        let recovered: Vec<bool> = (0..n).map(|t| dec.x_hat[t] == x[t] && dec.y_hat[t] == y[t]).collect();
        SwTrial {
            j: ex.j,
            i: ey.i.index,
            l: ey.l,
            block_error: recovered.iter().any(|&ok| !ok),
            fallback: ex.i.fallback || ex.jk_fallback || ey.l_fallback,
            ambiguous: dec.ambiguous(),
            recovered,
        }
    }

    pub fn evaluate(&self, master: u64, codebook_index: u64, source_trials: usize, mode: Mode) -> Result<SwMetrics> {
        Ok(self.evaluate_detailed(master, codebook_index, source_trials, mode)?.0)
    }

    /// [`evaluate`](Self::evaluate) plus the individual trials.
    pub fn evaluate_detailed(
        &self,
        master: u64,
        codebook_index: u64,
        source_trials: usize,
        mode: Mode,
    ) -> Result<(SwMetrics, Vec<SwTrial>)> {
        let trials: Vec<SwTrial> = (0..source_trials as u64).map(|t| self.trial(master, codebook_index, t)).collect();
        let mut audit = EmulatorAudit::default();
        let (v, exact, undersampled) = match mode {
            Mode::Exact => (self.exact_joint_uniformity(&mut audit)?, true, false),
            Mode::MonteCarlo { .. } => {
                let mut counts: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
                for t in &trials {
                    *counts.entry((t.j, t.i, t.l)).or_insert(0) += 1;
                }
                let c = 1.0 / self.derived.output_size() as f64;
                let total = trials.len().max(1) as f64;
                let mut terms: Vec<f64> = counts.values().map(|&k| math::abs(k as f64 / total - c)).collect();
                terms.push((self.derived.output_size() - counts.len() as u128) as f64 * c);
                let under = (trials.len() as f64) < 10.0 * self.derived.output_size() as f64;
                (math::compensated_sum(terms), false, under)
            }
        };
        let frac = |f: &dyn Fn(&SwTrial) -> bool| {
            stats::mean(&trials.iter().map(|t| if f(t) { 1.0 } else { 0.0 }).collect::<Vec<_>>())
        };
        let metrics = SwMetrics {
            joint_uniformity_v: v,
            uniformity_exact: exact,
            uniformity_undersampled: undersampled,
            block_err: frac(&|t| t.block_error),
            encoder_fallback_rate: frac(&|t| t.fallback),
            decode_ambiguity_rate: frac(&|t| t.ambiguous),
            dims: self.scb.dims(),
            seed_bins: self.derived.seed_bins,
            total_len: self.total_len(),
            audit,
        };
        Ok((metrics, trials))
    }

    /// Encoder rates in bits per extended source symbol: `(X, Y)`.
    pub fn rates(&self) -> (f64, f64) {
        let d = self.scb.dims();
        let m = self.total_len() as f64;
        (math::log2(d.x_rows as f64) / m, math::log2((d.u_rows * d.y_rows) as f64) / m)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwReport {
    pub per_codebook: Vec<SwMetrics>,
    pub median_joint_uniformity_v: f64,
    pub median_block_err: f64,
}

impl SwReport {
    pub fn from_metrics(per_codebook: Vec<SwMetrics>) -> Self {
        let med = |f: fn(&SwMetrics) -> f64| stats::median(&per_codebook.iter().map(f).collect::<Vec<_>>());
        Self {
            median_joint_uniformity_v: med(|m| m.joint_uniformity_v),
            median_block_err: med(|m| m.block_err),
            per_codebook,
        }
    }
}

pub fn sw_evaluate(config: &SwConfig, codebooks: usize, source_trials: usize, mode: Mode, master: u64) -> Result<SwReport> {
    let per_codebook = (0..codebooks as u64)
        .map(|c| sw_build(config, master, c)?.evaluate(master, c, source_trials, mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(SwReport::from_metrics(per_codebook))
}

/// Two corner-point codes used on consecutive blocks.
///
/// The first code conveys `Y` fully; the second is the same scheme with the
/// roles of `X` and `Y` exchanged. Running `first_blocks` blocks of the first
/// and `second_blocks` of the second gives the interpolated rate pair.
#[derive(Clone, Debug)]
pub struct TimeSharing {
    pub first: SwCode,
    pub second: SwCode,
    pub first_blocks: usize,
    pub second_blocks: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSharingMetrics {
    pub rate_x: f64,
    pub rate_y: f64,
    /// Fraction of trials where any block failed.
    pub block_err: f64,
    /// `Σ` of the component codes' uniformity distances, an upper bound for the concatenation.
    pub joint_uniformity_bound: f64,
}

impl TimeSharing {
    pub fn new(config: &SwConfig, master: u64, codebook_index: u64, first_blocks: usize, second_blocks: usize) -> Result<Self> {
        if first_blocks + second_blocks == 0 {
            return invalid("time sharing needs at least one block");
        }
        Ok(Self {
            first: sw_build(config, master, codebook_index)?,
            second: sw_build(&config.swapped()?, master, codebook_index + (1 << 32))?,
            first_blocks,
            second_blocks,
        })
    }

    pub fn rates(&self) -> (f64, f64) {
        let (a, b) = (self.first_blocks as f64, self.second_blocks as f64);
        let (ax, ay) = self.first.rates();
        // the swapped code sends Y in the X role
        let (by, bx) = self.second.rates();
        ((a * ax + b * bx) / (a + b), (a * ay + b * by) / (a + b))
    }

    pub fn evaluate(&self, master: u64, codebook_index: u64, trials: usize, mode: Mode) -> Result<TimeSharingMetrics> {
        let mut audit = EmulatorAudit::default();
        let mut bound = 0.0;
        if self.first_blocks > 0 {
            bound += self.first_blocks as f64 * self.uniformity(&self.first, &mut audit, mode, master, codebook_index)?;
        }
        if self.second_blocks > 0 {
            bound += self.second_blocks as f64 * self.uniformity(&self.second, &mut audit, mode, master, codebook_index)?;
        }
        let mut errors = 0usize;
        for t in 0..trials as u64 {
            let mut r = rng::stream(master, &format!("sw/time-sharing/{codebook_index}"), t);
            let mut failed = false;
            for _ in 0..self.first_blocks {
                let (x, y) = self.first.sample_source(&mut r);
                failed |= self.first.run(&x, &y).block_error;
            }
            for _ in 0..self.second_blocks {
                let (y, x) = self.second.sample_source(&mut r);
                failed |= self.second.run(&y, &x).block_error;
            }
            errors += failed as usize;
        }
        let (rate_x, rate_y) = self.rates();
        Ok(TimeSharingMetrics {
            rate_x,
            rate_y,
            block_err: errors as f64 / trials.max(1) as f64,
            joint_uniformity_bound: bound.min(2.0),
        })
    }

    fn uniformity(&self, code: &SwCode, audit: &mut EmulatorAudit, mode: Mode, master: u64, c: u64) -> Result<f64> {
        match mode {
            Mode::Exact => code.exact_joint_uniformity(audit),
            Mode::MonteCarlo { trials } => Ok(code.evaluate(master, c, trials, mode)?.joint_uniformity_v),
        }
    }
}

/// `p_U^{⊗n}` mass of a label sequence.
pub fn sequence_prob(p: &Pmf, seq: &[Sym]) -> f64 {
    seq.iter().map(|&s| p.prob(s as usize)).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Alphabet, Channel};

    fn block_diag() -> JointPmf {
        let mut m = vec![0.0; 16];
        for x in 0..4 {
            for y in 0..4 {
                if x / 2 == y / 2 {
                    m[x * 4 + y] = if x < 2 { 0.15 } else { 0.1 };
                }
            }
        }
        JointPmf::new(vec![Alphabet::indexed(4), Alphabet::indexed(4)], m).unwrap()
    }

    #[test]
    fn trivial_common_part_is_rejected() {
        let j = JointPmf::independent(&Pmf::uniform(Alphabet::binary()), &Pmf::uniform(Alphabet::binary())).unwrap();
        let cfg = SwConfig { source: j, epsilon: 0.1, n: 4, delta: 0.2 };
        assert_eq!(cfg.derive().unwrap_err(), Error::TrivialCommonPart);
    }

    #[test]
    fn product_l1_matches_direct_sum() {
        let a = [0.1f64, 0.3, 0.05];
        let mut b = vec![0.2f64, 0.01, 0.5, 0.07];
        let (w, c) = (0.7, 0.004);
        let direct: f64 = a.iter().flat_map(|&x| b.iter().map(move |&y| (w * x * y - c).abs())).sum();
        b.sort_by(f64::total_cmp);
        assert!((product_l1(w, &a, &b, &prefix(&b), c) - direct).abs() < 1e-15);
    }

    #[test]
    fn exact_uniformity_matches_brute_force() {
        let cfg = SwConfig { source: block_diag(), epsilon: 0.16, n: 2, delta: 0.5 };
        assert_eq!(cfg.derive().unwrap().seed_bins, 2);
        let code = sw_build(&cfg, 5, 0).unwrap();
        let mut audit = EmulatorAudit::default();
        let v = code.exact_joint_uniformity(&mut audit).unwrap();
        assert!(audit.clean());
        // brute force over every extended source sequence pair
        let m = code.total_len();
        let mass = cfg.source.mass();
        let mut dist: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        let letters: Vec<usize> = (0..16).filter(|&l| mass[l] > 0.0).collect();
        let mut idx = vec![0usize; m];
        loop {
            let p: f64 = idx.iter().map(|&i| mass[letters[i]]).product();
            let x: Vec<Sym> = idx.iter().map(|&i| (letters[i] / 4) as Sym).collect();
            let y: Vec<Sym> = idx.iter().map(|&i| (letters[i] % 4) as Sym).collect();
            let t = code.run(&x, &y);
            *dist.entry((t.j, t.i, t.l)).or_insert(0.0) += p;
            let mut pos = 0;
            loop {
                if pos == m {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] < letters.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == m {
                break;
            }
        }
        let c = 1.0 / code.derived.output_size() as f64;
        let brute: f64 = dist.values().map(|&p| (p - c).abs()).sum::<f64>()
            + (code.derived.output_size() as usize - dist.len()) as f64 * c;
        assert!((v - brute).abs() < 1e-9, "{v} vs {brute}");
    }

    #[test]
    fn copy_source_encoders_agree() {
        let j = JointPmf::from_input_and_channel(&Pmf::uniform(Alphabet::binary()), &Channel::identity(Alphabet::binary())).unwrap();
        let cfg = SwConfig { source: j, epsilon: 0.2, n: 4, delta: 0.2 };
        let code = sw_build(&cfg, 1, 0).unwrap();
        for t in 0..50 {
            code.trial(1, 0, t);
        }
    }
}
