//! Distributed lossy coding by concatenation: an outer lossy code maps source
//! blocks to message pairs, and the inner near-uniform distributed code
//! carries the message sequences.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::codebook::gen_codebook;
use crate::error::{check_budget, invalid};
use crate::gacskorner::CommonPart;
use crate::math;
use crate::rng::{self, StreamRng};
use crate::seed::EmulatorAudit;
use crate::sw::{sw_build, SwCode, SwConfig};
use crate::wz::{hamming, likelihood_posterior};
use crate::{stats, Alphabet, Channel, Error, JointPmf, Pmf, Result, Sym, TupleIndexer, EXACT_BUDGET};

/// Largest outer block length.
pub const MAX_OUTER_N: usize = 4;

/// A blockwise distributed lossy code on `(X, Y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OuterCode {
    pub n: usize,
    pub x_alphabet: Alphabet,
    pub y_alphabet: Alphabet,
    pub x_hat_alphabet: Alphabet,
    pub y_hat_alphabet: Alphabet,
    /// Message of each `x^n`, by lexicographic rank.
    pub f_x: Vec<usize>,
    pub f_y: Vec<usize>,
    pub messages_x: usize,
    pub messages_y: usize,
    /// `x̂^n` for message pair `(a, b)` at `(a · messages_y + b) · n`.
    pub g_x: Vec<Sym>,
    pub g_y: Vec<Sym>,
    /// `d_X(x, x̂)` at `x · |X̂| + x̂`.
    pub d_x: Vec<f64>,
    pub d_y: Vec<f64>,
}

fn tuple_count(k: usize, n: usize) -> Result<usize> {
    let c = TupleIndexer::new(k, n).count_wide();
    check_budget(c, EXACT_BUDGET)?;
    Ok(c as usize)
}

impl OuterCode {
    fn check(self) -> Result<Self> {
        if self.n == 0 || self.n > MAX_OUTER_N {
            return invalid(format!("outer block length must be in 1..={MAX_OUTER_N}"));
        }
        let cx = tuple_count(self.x_alphabet.len(), self.n)?;
        let cy = tuple_count(self.y_alphabet.len(), self.n)?;
        if self.f_x.len() != cx || self.f_y.len() != cy {
            return invalid("encoder tables must cover every source block");
        }
        if self.f_x.iter().any(|&m| m >= self.messages_x) || self.f_y.iter().any(|&m| m >= self.messages_y) {
            return invalid("encoder table references a message outside the message set");
        }
        let cells = self.messages_x * self.messages_y * self.n;
        if self.g_x.len() != cells || self.g_y.len() != cells {
            return invalid("decoder table must cover every message pair");
        }
        if self.d_x.len() != self.x_alphabet.len() * self.x_hat_alphabet.len()
            || self.d_y.len() != self.y_alphabet.len() * self.y_hat_alphabet.len()
        {
            return invalid("distortion tables have the wrong size");
        }
        Ok(self)
    }

    /// Messages are the source letters themselves (`n = 1`), Hamming distortion.
    pub fn identity(x_alphabet: Alphabet, y_alphabet: Alphabet) -> Result<Self> {
        let (kx, ky) = (x_alphabet.len(), y_alphabet.len());
        let mut g_x = Vec::with_capacity(kx * ky);
        let mut g_y = Vec::with_capacity(kx * ky);
        for a in 0..kx {
            for b in 0..ky {
                g_x.push(a as Sym);
                g_y.push(b as Sym);
            }
        }
        OuterCode {
            n: 1,
            x_hat_alphabet: x_alphabet.clone(),
            y_hat_alphabet: y_alphabet.clone(),
            f_x: (0..kx).collect(),
            f_y: (0..ky).collect(),
            messages_x: kx,
            messages_y: ky,
            g_x,
            g_y,
            d_x: hamming(kx),
            d_y: hamming(ky),
            x_alphabet,
            y_alphabet,
        }
        .check()
    }

    /// Per-letter quantizers: letter `a` goes to cell `cells[a]`, reconstructed
    /// as `reps[cell]`. Reconstruction alphabets equal the source alphabets and
    /// distortion is Hamming.
    pub fn scalar_quantizer(
        x_alphabet: Alphabet,
        y_alphabet: Alphabet,
        n: usize,
        (cells_x, reps_x): (&[usize], &[usize]),
        (cells_y, reps_y): (&[usize], &[usize]),
    ) -> Result<Self> {
        let (kx, ky) = (x_alphabet.len(), y_alphabet.len());
        if cells_x.len() != kx || cells_y.len() != ky {
            return invalid("one cell per source letter");
        }
        if cells_x.iter().any(|&c| c >= reps_x.len()) || cells_y.iter().any(|&c| c >= reps_y.len()) {
            return invalid("cell without a representative");
        }
        if reps_x.iter().any(|&r| r >= kx) || reps_y.iter().any(|&r| r >= ky) {
            return invalid("representative outside the alphabet");
        }
        let quantize = |k: usize, cells: &[usize], m: usize| -> Result<Vec<usize>> {
            let src = TupleIndexer::new(k, n);
            let msg = TupleIndexer::new(m, n);
            let count = tuple_count(k, n)?;
            Ok((0..count)
                .map(|r| {
                    let t: Vec<Sym> = src.tuple(r).iter().map(|&a| cells[a as usize] as Sym).collect();
                    msg.rank(&t)
                })
                .collect())
        };
        let (mx, my) = (reps_x.len(), reps_y.len());
        let messages_x = tuple_count(mx, n)?;
        let messages_y = tuple_count(my, n)?;
        let (ix, iy) = (TupleIndexer::new(mx, n), TupleIndexer::new(my, n));
        let mut g_x = Vec::with_capacity(messages_x * messages_y * n);
        let mut g_y = Vec::with_capacity(messages_x * messages_y * n);
        for a in 0..messages_x {
            for b in 0..messages_y {
                g_x.extend(ix.tuple(a).iter().map(|&c| reps_x[c as usize] as Sym));
                g_y.extend(iy.tuple(b).iter().map(|&c| reps_y[c as usize] as Sym));
            }
        }
        OuterCode {
            n,
            f_x: quantize(kx, cells_x, mx)?,
            f_y: quantize(ky, cells_y, my)?,
            messages_x,
            messages_y,
            g_x,
            g_y,
            d_x: hamming(kx),
            d_y: hamming(ky),
            x_hat_alphabet: x_alphabet.clone(),
            y_hat_alphabet: y_alphabet.clone(),
            x_alphabet,
            y_alphabet,
        }
        .check()
    }

    /// Independent random lossy codes for each side. Each block is sent to its
    /// most likely codeword under the test channel `Q_{X|W}` (ties to the
    /// smaller index); the codeword is the reconstruction.
    pub fn random_codebook(
        source: &JointPmf,
        n: usize,
        (size_x, x_given_w): (usize, &Channel),
        (size_y, y_given_w): (usize, &Channel),
        rng: &mut StreamRng,
    ) -> Result<Self> {
        let mut side = |p: Pmf, size: usize, ch: &Channel| -> Result<(Vec<usize>, Vec<Sym>)> {
            if ch.input() != p.alphabet() || ch.output() != p.alphabet() {
                return Err(Error::AlphabetMismatch);
            }
            // codewords are drawn from the reconstruction marginal matching the source
            let cb = gen_codebook(&p, n, size, 1, rng, "dlc/outer")?;
            let count = tuple_count(p.len(), n)?;
            let ix = TupleIndexer::new(p.len(), n);
            let f = (0..count)
                .map(|r| {
                    let post = likelihood_posterior(&cb, ch, &ix.tuple(r));
                    let mut best = (0.0, 0);
                    for &(i, m) in post.pmf.entries() {
                        if m > best.0 {
                            best = (m, i);
                        }
                    }
                    best.1
                })
                .collect();
            Ok((f, cb.words().to_vec()))
        };
        let (f_x, words_x) = side(source.marginal_pmf(0)?, size_x, x_given_w)?;
        let (f_y, words_y) = side(source.marginal_pmf(1)?, size_y, y_given_w)?;
        let mut g_x = Vec::with_capacity(size_x * size_y * n);
        let mut g_y = Vec::with_capacity(size_x * size_y * n);
        for a in 0..size_x {
            for b in 0..size_y {
                g_x.extend_from_slice(&words_x[a * n..(a + 1) * n]);
                g_y.extend_from_slice(&words_y[b * n..(b + 1) * n]);
            }
        }
        let (xa, ya) = (source.alphabet(0).clone(), source.alphabet(1).clone());
        OuterCode {
            n,
            f_x,
            f_y,
            messages_x: size_x,
            messages_y: size_y,
            g_x,
            g_y,
            d_x: hamming(xa.len()),
            d_y: hamming(ya.len()),
            x_hat_alphabet: xa.clone(),
            y_hat_alphabet: ya.clone(),
            x_alphabet: xa,
            y_alphabet: ya,
        }
        .check()
    }

    pub fn d_max_x(&self) -> f64 {
        self.d_x.iter().copied().fold(0.0, f64::max)
    }

    pub fn d_max_y(&self) -> f64 {
        self.d_y.iter().copied().fold(0.0, f64::max)
    }

    pub fn encode_x(&self, x: &[Sym]) -> usize {
        self.f_x[TupleIndexer::new(self.x_alphabet.len(), self.n).rank(x)]
    }

    pub fn encode_y(&self, y: &[Sym]) -> usize {
        self.f_y[TupleIndexer::new(self.y_alphabet.len(), self.n).rank(y)]
    }

    pub fn decode(&self, a: usize, b: usize) -> (&[Sym], &[Sym]) {
        let at = (a * self.messages_y + b) * self.n;
        (&self.g_x[at..at + self.n], &self.g_y[at..at + self.n])
    }

    /// Per-symbol distortions `(d_X, d_Y)` of one block given the messages used.
    pub fn block_distortion(&self, x: &[Sym], y: &[Sym], a: usize, b: usize) -> (f64, f64) {
        let (xh, yh) = self.decode(a, b);
        let kxh = self.x_hat_alphabet.len();
        let kyh = self.y_hat_alphabet.len();
        let dx: f64 = x.iter().zip(xh).map(|(&s, &h)| self.d_x[s as usize * kxh + h as usize]).sum();
        let dy: f64 = y.iter().zip(yh).map(|(&s, &h)| self.d_y[s as usize * kyh + h as usize]).sum();
        (dx / self.n as f64, dy / self.n as f64)
    }

    /// Visits every block pair `(x^n, y^n)` with positive mass under `source^{⊗n}`.
    fn for_each_block(&self, source: &JointPmf, mut visit: impl FnMut(&[Sym], &[Sym], f64)) -> Result<()> {
        let (kx, ky) = (self.x_alphabet.len(), self.y_alphabet.len());
        if source.dims() != [kx, ky] {
            return Err(Error::AlphabetMismatch);
        }
        let cx = tuple_count(kx, self.n)?;
        let cy = tuple_count(ky, self.n)?;
        check_budget(cx as u128 * cy as u128, EXACT_BUDGET)?;
        let (ix, iy) = (TupleIndexer::new(kx, self.n), TupleIndexer::new(ky, self.n));
        let mut x = vec![0 as Sym; self.n];
        let mut y = vec![0 as Sym; self.n];
        for rx in 0..cx {
            ix.unrank(rx, &mut x);
            for ry in 0..cy {
                iy.unrank(ry, &mut y);
                let p: f64 = x.iter().zip(&y).map(|(&a, &b)| source.prob(&[a as usize, b as usize])).product();
                if p > 0.0 {
                    visit(&x, &y, p);
                }
            }
        }
        Ok(())
    }

    /// Exact joint pmf of the message pair under the i.i.d. source.
    pub fn message_joint(&self, source: &JointPmf) -> Result<JointPmf> {
        let mut mass = vec![0.0; self.messages_x * self.messages_y];
        self.for_each_block(source, |x, y, p| {
            mass[self.encode_x(x) * self.messages_y + self.encode_y(y)] += p;
        })?;
        JointPmf::new(vec![Alphabet::indexed(self.messages_x), Alphabet::indexed(self.messages_y)], mass)
    }

    /// Exact expected per-symbol distortions `(E d_X, E d_Y)` of the outer code alone.
    pub fn expected_distortion(&self, source: &JointPmf) -> Result<(f64, f64)> {
        let mut tx = Vec::new();
        let mut ty = Vec::new();
        self.for_each_block(source, |x, y, p| {
            let (dx, dy) = self.block_distortion(x, y, self.encode_x(x), self.encode_y(y));
            tx.push(p * dx);
            ty.push(p * dy);
        })?;
        Ok((math::compensated_sum(tx), math::compensated_sum(ty)))
    }

    /// Appends to each message a digest of the block's common-part labels:
    /// the lexicographic rank of the label sequence modulo `pad_size`.
    /// Both encoders compute the same digest, so the padded messages share it.
    pub fn pad_with_common(&self, cp: &CommonPart, pad_size: usize) -> Result<OuterCode> {
        if !cp.is_nontrivial() {
            return Err(Error::TrivialCommonPart);
        }
        if pad_size == 0 {
            return invalid("pad size must be at least 1");
        }
        if cp.u_of_x.len() != self.x_alphabet.len() || cp.u_of_y.len() != self.y_alphabet.len() {
            return Err(Error::AlphabetMismatch);
        }
        if pad_size == 1 {
            return Ok(self.clone());
        }
        let ku = cp.u_alphabet.len();
        let iu = TupleIndexer::new(ku, self.n);
        let digest = |labels: Vec<Sym>| iu.rank(&labels) % pad_size;
        let ix = TupleIndexer::new(self.x_alphabet.len(), self.n);
        let iy = TupleIndexer::new(self.y_alphabet.len(), self.n);
        let f_x = self.f_x.iter().enumerate().map(|(r, &m)| m * pad_size + digest(cp.label_x(&ix.tuple(r)))).collect();
        let f_y = self.f_y.iter().enumerate().map(|(r, &m)| m * pad_size + digest(cp.label_y(&iy.tuple(r)))).collect();
        let (mx, my) = (self.messages_x * pad_size, self.messages_y * pad_size);
        let mut g_x = Vec::with_capacity(mx * my * self.n);
        let mut g_y = Vec::with_capacity(mx * my * self.n);
        for a in 0..mx {
            for b in 0..my {
                let (xh, yh) = self.decode(a / pad_size, b / pad_size);
                g_x.extend_from_slice(xh);
                g_y.extend_from_slice(yh);
            }
        }
        OuterCode { f_x, f_y, messages_x: mx, messages_y: my, g_x, g_y, ..self.clone() }.check()
    }

    /// Rate increase of [`pad_with_common`](Self::pad_with_common) in bits per source symbol.
    pub fn padding_rate(&self, pad_size: usize) -> f64 {
        math::log2(pad_size as f64) / self.n as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DlcConfig {
    pub source: JointPmf,
    pub outer: OuterCode,
    /// Inner block length, in messages.
    pub inner_n: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Inner blocks per trial.
    pub blocks: usize,
}

/// The outer code composed with an inner code on its message pairs.
#[derive(Clone, Debug)]
pub struct DlcCode {
    pub config: DlcConfig,
    pub message_joint: JointPmf,
    pub inner: SwCode,
}

pub fn dlc_concatenate(config: &DlcConfig, master: u64, codebook_index: u64) -> Result<DlcCode> {
    if config.blocks == 0 {
        return invalid("at least one inner block per trial");
    }
    let message_joint = config.outer.message_joint(&config.source)?;
    let inner_cfg = SwConfig { source: message_joint.clone(), epsilon: config.epsilon, n: config.inner_n, delta: config.delta };
    let inner = sw_build(&inner_cfg, master, codebook_index)?;
    Ok(DlcCode { config: config.clone(), message_joint, inner })
}

/// Per-trial distortion bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct DlcTrial {
    pub distortion_x: f64,
    pub distortion_y: f64,
    /// Outer-code distortion over the message positions, as if every message arrived.
    pub baseline_x: f64,
    pub baseline_y: f64,
    /// Fraction of inner blocks with a block error.
    pub inner_block_err: f64,
    /// Whether `distortion ≤ baseline + d_max · (inner_block_err + overhead) + 1e-9` for both sides.
    pub accounting_holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DlcMetrics {
    pub joint_uniformity_v: f64,
    /// Uniformity of the composed encoders, recomputed from the outer code's message statistics.
    pub composed_uniformity_v: f64,
    pub avg_distortion_x: f64,
    pub avg_distortion_y: f64,
    pub baseline_x: f64,
    pub baseline_y: f64,
    pub rate_x: f64,
    pub rate_y: f64,
    pub inner_block_err: f64,
    /// `(m - n) / m` for the inner code.
    pub overhead: f64,
    pub accounting_violations: usize,
    pub trials: usize,
    pub audit: EmulatorAudit,
}

impl DlcCode {
    pub fn overhead(&self) -> f64 {
        let m = self.inner.total_len() as f64;
        (m - self.config.inner_n as f64) / m
    }

    /// Source symbols per inner block.
    pub fn block_symbols(&self) -> usize {
        self.inner.total_len() * self.config.outer.n
    }

    pub fn trial(&self, master: u64, codebook_index: u64, trial: u64) -> DlcTrial {
        let outer = &self.config.outer;
        let no = outer.n;
        let (m, n_in) = (self.inner.total_len(), self.config.inner_n);
        let ky = self.config.source.dims()[1];
        let cdf = rng::cdf(self.config.source.mass());
        let mut r = rng::stream(master, &format!("dlc/source/{codebook_index}"), trial);
        let (dmx, dmy) = (outer.d_max_x(), outer.d_max_y());
        let (mut dx, mut dy, mut bx, mut by, mut errs) = (0.0, 0.0, 0.0, 0.0, 0usize);
        for _ in 0..self.config.blocks {
            let (x, y): (Vec<Sym>, Vec<Sym>) = (0..m * no)
                .map(|_| {
                    let l = rng::sample_cdf(&cdf, rng::uniform01(&mut r));
                    ((l / ky) as Sym, (l % ky) as Sym)
                })
                .unzip();
            let mx: Vec<Sym> = x.chunks(no).map(|b| outer.encode_x(b) as Sym).collect();
            let my: Vec<Sym> = y.chunks(no).map(|b| outer.encode_y(b) as Sym).collect();
            let t = self.inner.run(&mx, &my);
            errs += t.block_error as usize;
            let (mut sx, mut sy, mut ox, mut oy) = (0.0, 0.0, 0.0, 0.0);
            for p in 0..n_in {
                let (xb, yb) = (&x[p * no..(p + 1) * no], &y[p * no..(p + 1) * no]);
                let (ddx, ddy) = outer.block_distortion(xb, yb, mx[p] as usize, my[p] as usize);
                ox += ddx;
                oy += ddy;
                if t.recovered[p] {
                    sx += ddx;
                    sy += ddy;
                } else {
                    sx += dmx;
                    sy += dmy;
                }
            }
            // seed segments carry no reconstruction
            let seed_blocks = (m - n_in) as f64;
            dx += (sx + seed_blocks * dmx) / m as f64;
            dy += (sy + seed_blocks * dmy) / m as f64;
            bx += ox / n_in as f64;
            by += oy / n_in as f64;
        }
        let b = self.config.blocks as f64;
        let (dx, dy, bx, by) = (dx / b, dy / b, bx / b, by / b);
        let err = errs as f64 / b;
        let ov = self.overhead();
        let holds = dx <= bx + dmx * (err + ov) + 1e-9 && dy <= by + dmy * (err + ov) + 1e-9;
        DlcTrial { distortion_x: dx, distortion_y: dy, baseline_x: bx, baseline_y: by, inner_block_err: err, accounting_holds: holds }
    }

    pub fn evaluate(&self, master: u64, codebook_index: u64, trials: usize) -> Result<DlcMetrics> {
        Ok(self.evaluate_detailed(master, codebook_index, trials)?.0)
    }

    /// [`evaluate`](Self::evaluate) plus the individual trials.
    pub fn evaluate_detailed(&self, master: u64, codebook_index: u64, trials: usize) -> Result<(DlcMetrics, Vec<DlcTrial>)> {
        let mut audit = EmulatorAudit::default();
        let inner_v = self.inner.exact_joint_uniformity(&mut audit)?;
        // the composed encoders see the source only through the outer messages
        let recomputed = self.config.outer.message_joint(&self.config.source)?;
        let composed_cfg = SwConfig { source: recomputed, ..self.inner.config.clone() };
        let composed = SwCode::with_codebook(&composed_cfg, composed_cfg.derive()?, self.inner.scb.clone())?;
        let composed_v = composed.exact_joint_uniformity(&mut EmulatorAudit::default())?;
        let rows: Vec<DlcTrial> = (0..trials as u64).map(|t| self.trial(master, codebook_index, t)).collect();
        let mean = |f: fn(&DlcTrial) -> f64| stats::mean(&rows.iter().map(f).collect::<Vec<_>>());
        let (rx, ry) = self.inner.rates();
        let no = self.config.outer.n as f64;
        let metrics = DlcMetrics {
            joint_uniformity_v: inner_v,
            composed_uniformity_v: composed_v,
            avg_distortion_x: mean(|t| t.distortion_x),
            avg_distortion_y: mean(|t| t.distortion_y),
            baseline_x: mean(|t| t.baseline_x),
            baseline_y: mean(|t| t.baseline_y),
            rate_x: rx / no,
            rate_y: ry / no,
            inner_block_err: mean(|t| t.inner_block_err),
            overhead: self.overhead(),
            accounting_violations: rows.iter().filter(|t| !t.accounting_holds).count(),
            trials,
            audit,
        };
        Ok((metrics, rows))
    }

    /// Distortions when messages bypass the inner code: the outer code's own.
    pub fn passthrough_distortion(&self, master: u64, codebook_index: u64, trials: usize) -> (f64, f64) {
        let outer = &self.config.outer;
        let no = outer.n;
        let ky = self.config.source.dims()[1];
        let cdf = rng::cdf(self.config.source.mass());
        let mut r = rng::stream(master, &format!("dlc/passthrough/{codebook_index}"), 0);
        let mut dx = Vec::with_capacity(trials);
        let mut dy = Vec::with_capacity(trials);
        for _ in 0..trials {
            let (x, y): (Vec<Sym>, Vec<Sym>) = (0..no)
                .map(|_| {
                    let l = rng::sample_cdf(&cdf, rng::uniform01(&mut r));
                    ((l / ky) as Sym, (l % ky) as Sym)
                })
                .unzip();
            let (a, b) = outer.block_distortion(&x, &y, outer.encode_x(&x), outer.encode_y(&y));
            dx.push(a);
            dy.push(b);
        }
        (stats::mean(&dx), stats::mean(&dy))
    }
}
