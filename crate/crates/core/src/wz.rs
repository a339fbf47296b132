//! Lossy compression of `X` with side information `Y` at the decoder, with a
//! nearly uniform encoder output.
//!
//! The encoder draws a codeword index from the likelihood posterior of a
//! resolvability codebook. The draw is made deterministic by a seeded sampler
//! whose seed is extracted from extra source symbols appended to the block.
//! Only the row index is sent; the decoder picks the column by maximum
//! likelihood against `Y^n` and reconstructs letterwise.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::codebook::{dimension, gen_codebook, Codebook, Dimension};
use crate::error::{check_budget, invalid};
use crate::math;
use crate::rng::{self, StreamRng};
use crate::seed::{extract_intrinsic, EmulatorAudit, Extractor, HeadRule, SeededSampler};
use crate::typicality::LetterTypicality;
use crate::{stats, Alphabet, Channel, Error, JointPmf, Mode, Pmf, Result, SparsePmf, Sym, TupleIndexer, EXACT_BUDGET};

/// The auxiliary channel `Q_{W|X}`, the reconstruction `f(w, y)` and the distortion.
#[derive(Clone, Debug, PartialEq)]
pub struct TestChannel {
    pub w_given_x: Channel,
    pub x_hat: Alphabet,
    /// `f(w, y)` at `w · |Y| + y`.
    pub reconstruct: Vec<usize>,
    /// `d(x, x̂)` at `x · |X̂| + x̂`.
    pub distortion: Vec<f64>,
    pub d_max: f64,
}

/// Hamming distortion on an alphabet.
pub fn hamming(k: usize) -> Vec<f64> {
    (0..k * k).map(|i| if i / k == i % k { 0.0 } else { 1.0 }).collect()
}

impl TestChannel {
    pub fn new(w_given_x: Channel, x_hat: Alphabet, reconstruct: Vec<usize>, distortion: Vec<f64>, y_len: usize) -> Result<Self> {
        let kw = w_given_x.output().len();
        let kx = w_given_x.input().len();
        if reconstruct.len() != kw * y_len {
            return Err(Error::LengthMismatch { expected: kw * y_len, found: reconstruct.len() });
        }
        if let Some(&bad) = reconstruct.iter().find(|&&r| r >= x_hat.len()) {
            return Err(Error::SymbolOutOfRange { symbol: bad, size: x_hat.len() });
        }
        if distortion.len() != kx * x_hat.len() {
            return Err(Error::LengthMismatch { expected: kx * x_hat.len(), found: distortion.len() });
        }
        if distortion.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return invalid("distortions must be finite and nonnegative");
        }
        let d_max = distortion.iter().copied().fold(0.0, f64::max);
        Ok(Self { w_given_x, x_hat, reconstruct, distortion, d_max })
    }

    /// The test channel whose reconstruction minimizes the posterior expected
    /// distortion of each `(w, y)` letter; ties go to the smaller symbol.
    pub fn bayes(source: &JointPmf, w_given_x: Channel, x_hat: Alphabet, distortion: Vec<f64>) -> Result<Self> {
        let (kx, ky, kw, kh) = (source.dims()[0], source.dims()[1], w_given_x.output().len(), x_hat.len());
        if distortion.len() != kx * kh {
            return Err(Error::LengthMismatch { expected: kx * kh, found: distortion.len() });
        }
        let mut reconstruct = vec![0; kw * ky];
        for w in 0..kw {
            for y in 0..ky {
                let mut best = (f64::INFINITY, 0);
                for h in 0..kh {
                    let risk: f64 = (0..kx)
                        .map(|x| source.prob(&[x, y]) * w_given_x.prob(x, w) * distortion[x * kh + h])
                        .sum();
                    if risk < best.0 {
                        best = (risk, h);
                    }
                }
                reconstruct[w * ky + y] = best.1;
            }
        }
        Self::new(w_given_x, x_hat, reconstruct, distortion, ky)
    }

    pub fn f(&self, w: usize, y: usize, y_len: usize) -> usize {
        self.reconstruct[w * y_len + y]
    }

    pub fn d(&self, x: usize, x_hat: usize) -> f64 {
        self.distortion[x * self.x_hat.len() + x_hat]
    }

    /// `E[d(X, f(W, Y))]` under `Q_XY Q_{W|X}`.
    pub fn expected_distortion(&self, source: &JointPmf) -> f64 {
        let (kx, ky) = (source.dims()[0], source.dims()[1]);
        let kw = self.w_given_x.output().len();
        let mut terms = Vec::with_capacity(kx * ky * kw);
        for x in 0..kx {
            for y in 0..ky {
                for w in 0..kw {
                    let p = source.prob(&[x, y]) * self.w_given_x.prob(x, w);
                    terms.push(p * self.d(x, self.f(w, y, ky)));
                }
            }
        }
        math::compensated_sum(terms)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WzConfig {
    /// Joint of `(X, Y)`.
    pub source: JointPmf,
    pub test: TestChannel,
    pub n: usize,
    pub epsilon: f64,
    /// Typicality level for the atypicality metric.
    pub delta: f64,
    /// Distortion target `Δ`; when set, the test channel must meet it.
    pub distortion_target: Option<f64>,
}

/// Rates and sizes derived from a [`WzConfig`].
#[derive(Clone, Debug, PartialEq)]
pub struct WzDerived {
    pub i_xw: f64,
    pub i_wy: f64,
    pub i_xw_given_y: f64,
    pub h_x: f64,
    /// `R = I(X;W|Y) + 2ε`.
    pub rate: f64,
    /// `R' = I(W;Y) - ε`.
    pub rate_prime: f64,
    pub rows: Dimension,
    pub cols: Dimension,
    /// `ceil(3εn / H(X))` extra source symbols feeding the seed.
    pub seed_block: usize,
    /// `round(2^{2nε})`.
    pub seed_bins: usize,
    pub expected_distortion: f64,
}

impl WzDerived {
    pub fn n_effective(&self, n: usize) -> usize {
        n + self.seed_block
    }
}

impl WzConfig {
    pub fn derive(&self) -> Result<WzDerived> {
        if self.source.arity() != 2 {
            return invalid("source must be a joint of (X, Y)");
        }
        if self.n == 0 {
            return invalid("n must be positive");
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return invalid(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.test.w_given_x.input() != self.source.alphabet(0) {
            return Err(Error::AlphabetMismatch);
        }
        let xyw = self.source.compose_and_marginalize(&self.test.w_given_x, 0)?;
        let i_xw = xyw.mutual_information(&[0], &[2])?;
        let i_wy = xyw.mutual_information(&[2], &[1])?;
        let i_xw_given_y = xyw.conditional_mutual_information(&[0], &[2], &[1])?;
        let h_x = xyw.entropy_of(&[0])?;
        if h_x <= 0.0 {
            return invalid("source X is deterministic; no seed can be extracted");
        }
        let rate = i_xw_given_y + 2.0 * self.epsilon;
        let rate_prime = i_wy - self.epsilon;
        if rate_prime < 0.0 {
            return invalid(format!("R' = I(W;Y) - epsilon = {rate_prime} is negative; lower epsilon"));
        }
        let expected_distortion = self.test.expected_distortion(&self.source);
        if let Some(target) = self.distortion_target {
            if expected_distortion > target + 1e-12 {
                return invalid(format!("test channel distortion {expected_distortion} exceeds target {target}"));
            }
        }
        let seed_block = math::snapped_ceil(3.0 * self.epsilon * self.n as f64 / h_x) as usize;
        let seed_bins = math::index_set_size(self.n, 2.0 * self.epsilon);
        Ok(WzDerived {
            i_xw,
            i_wy,
            i_xw_given_y,
            h_x,
            rate,
            rate_prime,
            rows: dimension(self.n, rate),
            cols: dimension(self.n, rate_prime),
            seed_block,
            seed_bins,
            expected_distortion,
        })
    }
}

/// A built code: one random codebook plus everything the encoder and decoder use.
#[derive(Clone, Debug)]
pub struct WzCode {
    pub config: WzConfig,
    pub derived: WzDerived,
    pub codebook: Codebook,
    pub extractor: Extractor,
    x_pmf: Pmf,
    x_given_w: Channel,
    y_given_w: Channel,
    y_given_x: Channel,
    typ: LetterTypicality,
}

pub fn wz_build(config: &WzConfig, master: u64, codebook_index: u64) -> Result<WzCode> {
    let derived = config.derive()?;
    let xyw = config.source.compose_and_marginalize(&config.test.w_given_x, 0)?;
    let w_pmf = xyw.marginal_pmf(2)?;
    let x_pmf = xyw.marginal_pmf(0)?;
    let mut r = rng::stream(master, "wz/codebook", codebook_index);
    let codebook = gen_codebook(&w_pmf, config.n, derived.rows.size, derived.cols.size, &mut r, "wz/codebook")?;
    let extractor = extract_intrinsic(&x_pmf, derived.seed_block, derived.seed_bins)?;
    Ok(WzCode {
        x_given_w: xyw.conditional(2, 0)?,
        y_given_w: xyw.conditional(2, 1)?,
        y_given_x: config.source.conditional(0, 1)?,
        typ: LetterTypicality::joint(&xyw, config.delta)?,
        config: config.clone(),
        derived,
        codebook,
        extractor,
        x_pmf,
    })
}

/// A posterior over flat codebook indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    pub pmf: SparsePmf,
    /// Set when every likelihood was zero and the uniform fallback was used.
    pub fallback: bool,
}

/// `P(j, k | x) ∝ Π_t ch(x_t | w_t(j, k))`.
pub fn likelihood_posterior(cb: &Codebook, x_given_w: &Channel, x: &[Sym]) -> Posterior {
    let logs: Vec<f64> = (0..cb.len())
        .map(|w| {
            cb.word_flat(w)
                .iter()
                .zip(x)
                .map(|(&wi, &xi)| math::log2(x_given_w.prob(wi as usize, xi as usize)))
                .sum()
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Posterior { pmf: SparsePmf::uniform(cb.len()), fallback: true };
    }
    let weights = logs.iter().enumerate().map(|(i, &l)| (i, math::exp2(l - top))).collect();
    Posterior { pmf: SparsePmf::from_weights(cb.len(), weights).expect("positive top weight"), fallback: false }
}

/// Encoder output for one extended block.
#[derive(Clone, Debug, PartialEq)]
pub struct WzEncoding {
    pub row: usize,
    pub col: usize,
    pub seed: usize,
    pub fallback: bool,
    pub sampler: SeededSampler,
}

impl WzCode {
    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn n_effective(&self) -> usize {
        self.derived.n_effective(self.config.n)
    }

    pub fn sampler_for(&self, x: &[Sym]) -> (SeededSampler, bool) {
        let post = likelihood_posterior(&self.codebook, &self.x_given_w, x);
        let s = SeededSampler::from_rule(&post.pmf, self.derived.seed_bins, &HeadRule::default())
            .expect("posterior has a nonempty head");
        (s, post.fallback)
    }

    /// Encodes `n + seed_block` source symbols.
    pub fn encode(&self, x_extended: &[Sym]) -> Result<WzEncoding> {
        let n = self.n();
        if x_extended.len() != self.n_effective() {
            return Err(Error::LengthMismatch { expected: self.n_effective(), found: x_extended.len() });
        }
        let seed = self.extractor.bin(&x_extended[n..]);
        let (sampler, fallback) = self.sampler_for(&x_extended[..n]);
        let (row, col) = self.codebook.split_index(sampler.lookup(seed));
        Ok(WzEncoding { row, col, seed, fallback, sampler })
    }

    /// Maximum-likelihood column in `row` against `y`, then letterwise reconstruction.
    pub fn decode(&self, row: usize, y: &[Sym]) -> (usize, Vec<Sym>) {
        let mut best = (f64::NEG_INFINITY, 0);
        for k in 0..self.codebook.cols() {
            let l: f64 = self
                .codebook
                .word(row, k)
                .iter()
                .zip(y)
                .map(|(&w, &yi)| math::log2(self.y_given_w.prob(w as usize, yi as usize)))
                .sum();
            if l > best.0 {
                best = (l, k);
            }
        }
        let ky = self.config.source.dims()[1];
        let w = self.codebook.word(row, best.1);
        let x_hat = w.iter().zip(y).map(|(&wi, &yi)| self.config.test.f(wi as usize, yi as usize, ky) as Sym).collect();
        (best.1, x_hat)
    }

    fn sample_block(&self, r: &mut StreamRng) -> (Vec<Sym>, Vec<Sym>) {
        let x_cdf = self.x_pmf.cdf();
        let x: Vec<Sym> =
            (0..self.n_effective()).map(|_| rng::sample_cdf(&x_cdf, rng::uniform01(r)) as Sym).collect();
        let y = x[..self.n()]
            .iter()
            .map(|&xi| rng::sample_cdf(&rng::cdf(self.y_given_x.row(xi as usize)), rng::uniform01(r)) as Sym)
            .collect();
        (x, y)
    }
}

/// Metrics of one codebook.
#[derive(Clone, Debug, PartialEq)]
pub struct WzMetrics {
    /// `V(row index pmf, uniform on the rows)`.
    pub uniformity_v: f64,
    pub uniformity_exact: bool,
    /// Set when the Monte-Carlo uniformity estimate saw fewer than ten draws per row.
    pub uniformity_undersampled: bool,
    /// Per-symbol distortion over all `n + seed_block` symbols, seed symbols charged `d_max`.
    pub avg_distortion: f64,
    /// Per-symbol distortion over the first `n` symbols.
    pub distortion_first_n: f64,
    pub decode_err: f64,
    pub atypicality: f64,
    pub fallback_rate: f64,
    pub n_effective: usize,
    pub rows: usize,
    pub cols: usize,
    /// Samplers checked against `ε + M/ℓ`.
    pub audit: EmulatorAudit,
    /// Fraction of audited samplers with `seed_bins ≥ 2 · head size / ε`.
    pub certified_fraction: f64,
}

/// Outcome of one source trial.
#[derive(Clone, Debug, PartialEq)]
pub struct WzTrial {
    pub row: usize,
    pub col: usize,
    pub col_hat: usize,
    pub fallback: bool,
    pub typical: bool,
    pub distortion_first_n: f64,
    pub distortion_total: f64,
}

impl WzCode {
    /// Runs one source trial from stream `(master, "wz/source/<codebook>", trial)`.
    pub fn trial(&self, master: u64, codebook_index: u64, trial: u64) -> WzTrial {
        let mut r = rng::stream(master, &format!("wz/source/{codebook_index}"), trial);
        let (x, y) = self.sample_block(&mut r);
        let n = self.n();
        let enc = self.encode(&x).expect("block has the configured length");
        let (col_hat, x_hat) = self.decode(enc.row, &y);
        let w = self.codebook.word(enc.row, enc.col);
        let typical = !enc.fallback && self.typ.is_jointly_typical(&[&x[..n], &y, w]);
        let d: f64 = x[..n].iter().zip(&x_hat).map(|(&a, &b)| self.config.test.d(a as usize, b as usize)).sum();
        let seed_charge = self.derived.seed_block as f64 * self.config.test.d_max;
        WzTrial {
            row: enc.row,
            col: enc.col,
            col_hat,
            fallback: enc.fallback,
            typical,
            distortion_first_n: d / n as f64,
            distortion_total: (d + seed_charge) / self.n_effective() as f64,
        }
    }

    fn certified(&self, s: &SeededSampler) -> bool {
        self.derived.seed_bins as f64 >= 2.0 * s.head().len() as f64 / self.config.epsilon
    }

    /// Exact row-index pmf, marginalizing source blocks and extracted seeds.
    pub fn exact_row_pmf(&self, audit: &mut EmulatorAudit, certified: &mut usize) -> Result<Vec<f64>> {
        let n = self.n();
        let kx = self.x_pmf.len();
        let ix = TupleIndexer::new(kx, n);
        check_budget(ix.count_wide().saturating_mul(self.codebook.len() as u128), EXACT_BUDGET)?;
        let seed_pmf = self.extractor.bin_pmf();
        let mut rows = vec![Vec::new(); self.codebook.rows()];
        let mut x = vec![0 as Sym; n];
        for rank in 0..ix.count().expect("within budget") {
            ix.unrank(rank, &mut x);
            let px: f64 = x.iter().map(|&s| self.x_pmf.prob(s as usize)).product();
            if px == 0.0 {
                continue;
            }
            let (s, _) = self.sampler_for(&x);
            audit.record(&s);
            if self.certified(&s) {
                *certified += 1;
            }
            for (seed, &ps) in seed_pmf.iter().enumerate() {
                let (row, _) = self.codebook.split_index(s.lookup(seed));
                rows[row].push(px * ps);
            }
        }
        Ok(rows.into_iter().map(math::compensated_sum).collect())
    }

    /// Evaluates this codebook over `source_trials` blocks.
    ///
    /// Exact mode computes the row pmf exactly; Monte-Carlo mode uses the
    /// empirical row frequencies of the trials.
    pub fn evaluate(&self, master: u64, codebook_index: u64, source_trials: usize, mode: Mode) -> Result<WzMetrics> {
        Ok(self.evaluate_detailed(master, codebook_index, source_trials, mode)?.0)
    }

    /// [`evaluate`](Self::evaluate) plus the individual trials.
    pub fn evaluate_detailed(
        &self,
        master: u64,
        codebook_index: u64,
        source_trials: usize,
        mode: Mode,
    ) -> Result<(WzMetrics, Vec<WzTrial>)> {
        let trials: Vec<WzTrial> = (0..source_trials as u64).map(|t| self.trial(master, codebook_index, t)).collect();
        let mut audit = EmulatorAudit::default();
        let mut certified = 0usize;
        let rows = self.codebook.rows();
        let uniform = 1.0 / rows as f64;
        let (uniformity_v, exact, undersampled) = match mode {
            Mode::Exact => {
                let pmf = self.exact_row_pmf(&mut audit, &mut certified)?;
                (math::compensated_sum(pmf.iter().map(|&p| math::abs(p - uniform))), true, false)
            }
            Mode::MonteCarlo { .. } => {
                let mut counts = vec![0usize; rows];
                for t in &trials {
                    counts[t.row] += 1;
                }
                let total = trials.len().max(1) as f64;
                let v = math::compensated_sum(counts.iter().map(|&c| math::abs(c as f64 / total - uniform)));
                (v, false, (trials.len() as f64) < 10.0 * rows as f64)
            }
        };
        if !exact {
            // audit the samplers of the blocks actually seen
            for t in 0..source_trials as u64 {
                let mut r = rng::stream(master, &format!("wz/source/{codebook_index}"), t);
                let (x, _) = self.sample_block(&mut r);
                let (s, _) = self.sampler_for(&x[..self.n()]);
                audit.record(&s);
                if self.certified(&s) {
                    certified += 1;
                }
            }
        }
        let frac = |f: &dyn Fn(&WzTrial) -> bool| {
            let v: Vec<f64> = trials.iter().map(|t| if f(t) { 1.0 } else { 0.0 }).collect();
            stats::mean(&v)
        };
        let avg = |f: &dyn Fn(&WzTrial) -> f64| stats::mean(&trials.iter().map(f).collect::<Vec<_>>());
        let metrics = WzMetrics {
            uniformity_v,
            uniformity_exact: exact,
            uniformity_undersampled: undersampled,
            avg_distortion: avg(&|t| t.distortion_total),
            distortion_first_n: avg(&|t| t.distortion_first_n),
            decode_err: frac(&|t| t.col_hat != t.col),
            atypicality: frac(&|t| !t.typical),
            fallback_rate: frac(&|t| t.fallback),
            n_effective: self.n_effective(),
            rows,
            cols: self.codebook.cols(),
            certified_fraction: if audit.conditions == 0 { 0.0 } else { certified as f64 / audit.conditions as f64 },
            audit,
        };
        Ok((metrics, trials))
    }
}

/// Per-codebook metrics plus their medians.
#[derive(Clone, Debug, PartialEq)]
pub struct WzReport {
    pub per_codebook: Vec<WzMetrics>,
    pub median_uniformity_v: f64,
    pub median_avg_distortion: f64,
    pub median_decode_err: f64,
    pub median_atypicality: f64,
}

/// Builds `codebooks` codebooks and evaluates each.
pub fn wz_evaluate(config: &WzConfig, codebooks: usize, source_trials: usize, mode: Mode, master: u64) -> Result<WzReport> {
    let per_codebook = (0..codebooks as u64)
        .map(|c| wz_build(config, master, c)?.evaluate(master, c, source_trials, mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(WzReport::from_metrics(per_codebook))
}

impl WzReport {
    pub fn from_metrics(per_codebook: Vec<WzMetrics>) -> Self {
        let med = |f: fn(&WzMetrics) -> f64| stats::median(&per_codebook.iter().map(f).collect::<Vec<_>>());
        Self {
            median_uniformity_v: med(|m| m.uniformity_v),
            median_avg_distortion: med(|m| m.avg_distortion),
            median_decode_err: med(|m| m.decode_err),
            median_atypicality: med(|m| m.atypicality),
            per_codebook,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dsbs(p: f64) -> JointPmf {
        JointPmf::from_input_and_channel(&Pmf::uniform(Alphabet::binary()), &Channel::bsc(p).unwrap()).unwrap()
    }

    fn config(n: usize, eps: f64) -> WzConfig {
        let source = dsbs(0.1);
        let test = TestChannel::bayes(&source, Channel::bsc(0.25).unwrap(), Alphabet::binary(), hamming(2)).unwrap();
        WzConfig { source, test, n, epsilon: eps, delta: 0.5, distortion_target: None }
    }

    #[test]
    fn posterior_by_hand() {
        let cb = Codebook::from_words(Alphabet::binary(), 3, 2, 1, vec![0, 0, 0, 1, 1, 0]).unwrap();
        let post = likelihood_posterior(&cb, &Channel::bsc(0.1).unwrap(), &[0, 0, 0]);
        let a = 0.729 / (0.729 + 0.009);
        assert!((post.pmf.prob(0) - a).abs() < 1e-12);
        assert!(!post.fallback);
        let same = Codebook::from_words(Alphabet::binary(), 2, 3, 1, vec![1, 0, 1, 0, 1, 0]).unwrap();
        let post = likelihood_posterior(&same, &Channel::bsc(0.1).unwrap(), &[0, 0]);
        assert!((post.pmf.prob(2) - 1.0 / 3.0).abs() < 1e-12);
        let zero = likelihood_posterior(&same, &Channel::identity(Alphabet::binary()), &[0, 0]);
        assert!(zero.fallback);
    }

    #[test]
    fn bayes_reconstruction_follows_side_information() {
        let c = config(6, 0.1);
        // f(w, y) = y
        assert_eq!(c.test.reconstruct, vec![0, 1, 0, 1]);
        assert!((c.test.expected_distortion(&c.source) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn derived_rates() {
        let d = config(10, 0.1).derive().unwrap();
        assert!((d.rate - (d.i_xw - d.i_wy + 0.2)).abs() < 1e-12);
        assert_eq!(d.seed_block, 3);
        assert_eq!(d.seed_bins, 4);
        assert!(config(10, 0.0).derive().is_err());
        assert!(config(10, 0.5).derive().is_err());
    }

    #[test]
    fn encoder_is_deterministic() {
        let code = wz_build(&config(6, 0.1), 4, 0).unwrap();
        let x = [0, 1, 1, 0, 1, 0, 1, 1];
        let first = code.encode(&x).unwrap();
        for _ in 0..100 {
            assert_eq!(code.encode(&x).unwrap(), first);
        }
    }

    #[test]
    fn row_pmf_is_a_pmf() {
        let code = wz_build(&config(6, 0.1), 4, 1).unwrap();
        let mut audit = EmulatorAudit::default();
        let mut c = 0;
        let pmf = code.exact_row_pmf(&mut audit, &mut c).unwrap();
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(audit.clean());
        assert_eq!(audit.conditions, 64);
    }
}
