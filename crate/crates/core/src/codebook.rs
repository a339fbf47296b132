//! Random codebooks: flat `rows × cols` tables and three-tier superposition
//! codebooks whose inner words are drawn conditionally on a cloud centre.

use alloc::borrow::Cow;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_budget, invalid};
use crate::math;
use crate::prob::product_extend;
use crate::rng::{self, StreamRng};
use crate::typicality::LetterTypicality;
use crate::{Alphabet, Channel, Error, JointPmf, Mode, Pmf, Result, Sym, TupleIndexer, TuplePmf, CODEBOOK_BUDGET};

/// Largest output space `|X|^n` for exact induced distributions.
pub const EXACT_OUTPUT_BUDGET: usize = 1 << 20;

/// Expected hits per typical tuple below which a Monte-Carlo plug-in is flagged.
pub const MIN_EXPECTED_HITS: f64 = 10.0;

/// An index set `[1, 2^{n·rate}]` with its rounding recorded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dimension {
    pub rate: f64,
    /// `2^{n·rate}` before rounding.
    pub ideal: f64,
    pub size: usize,
}

pub fn dimension(n: usize, rate: f64) -> Dimension {
    Dimension { rate, ideal: math::exp2(n as f64 * rate), size: math::index_set_size(n, rate) }
}

impl Dimension {
    /// `size - ideal`, the rounding error.
    pub fn rounding(&self) -> f64 {
        self.size as f64 - self.ideal
    }
}

/// A plug-in or exact estimate of a gap between distributions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapEstimate {
    pub value: f64,
    pub exact: bool,
    /// Set when a Monte-Carlo estimate saw too few samples per typical tuple.
    pub undersampled: bool,
}

/// A `rows × cols` table of length-`n` words over one alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    alphabet: Alphabet,
    n: usize,
    rows: usize,
    cols: usize,
    words: Vec<Sym>,
    tag: String,
}

fn draw_word(cdf: &[f64], n: usize, rng: &mut StreamRng, out: &mut Vec<Sym>) {
    for _ in 0..n {
        out.push(rng::sample_cdf(cdf, rng::uniform01(rng)) as Sym);
    }
}

fn check_codebook_budget(words: usize, n: usize) -> Result<()> {
    check_budget((words as u128).saturating_mul(n as u128), CODEBOOK_BUDGET)
}

/// Draws every symbol of every word i.i.d. from `q`, row by row.
pub fn gen_codebook(q: &Pmf, n: usize, rows: usize, cols: usize, rng: &mut StreamRng, tag: &str) -> Result<Codebook> {
    if n == 0 || rows == 0 || cols == 0 {
        return invalid("codebook dimensions must be positive");
    }
    check_codebook_budget(rows.saturating_mul(cols), n)?;
    let cdf = q.cdf();
    let mut words = Vec::with_capacity(rows * cols * n);
    for _ in 0..rows * cols {
        draw_word(&cdf, n, rng, &mut words);
    }
    Ok(Codebook { alphabet: q.alphabet().clone(), n, rows, cols, words, tag: tag.into() })
}

impl Codebook {
    pub fn from_words(alphabet: Alphabet, n: usize, rows: usize, cols: usize, words: Vec<Sym>) -> Result<Self> {
        if n == 0 || rows == 0 || cols == 0 {
            return invalid("codebook dimensions must be positive");
        }
        check_codebook_budget(rows.saturating_mul(cols), n)?;
        if words.len() != rows * cols * n {
            return Err(Error::LengthMismatch { expected: rows * cols * n, found: words.len() });
        }
        if let Some(&s) = words.iter().find(|&&s| s as usize >= alphabet.len()) {
            return Err(Error::SymbolOutOfRange { symbol: s as usize, size: alphabet.len() });
        }
        Ok(Self { alphabet, n, rows, cols, words, tag: String::new() })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn words(&self) -> &[Sym] {
        &self.words
    }

    pub fn word(&self, row: usize, col: usize) -> &[Sym] {
        self.word_flat(row * self.cols + col)
    }

    /// Word at flat index `row · cols + col`.
    pub fn word_flat(&self, index: usize) -> &[Sym] {
        &self.words[index * self.n..(index + 1) * self.n]
    }

    pub fn split_index(&self, flat: usize) -> (usize, usize) {
        (flat / self.cols, flat % self.cols)
    }

    fn check_channel(&self, ch: &Channel) -> Result<()> {
        if ch.input() != &self.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        Ok(())
    }

    /// Exact output distribution of a uniformly chosen word sent through `ch`.
    pub fn induced_output_pmf(&self, ch: &Channel) -> Result<TuplePmf> {
        self.check_channel(ch)?;
        mixture_output(ch.output(), self.n, (0..self.len()).map(|w| self.word_flat(w)), |t, w, c| {
            ch.prob(w[t] as usize, c)
        })
    }

    /// One draw of `(flat index, channel output)`.
    pub fn sample_output(&self, ch: &Channel, rng: &mut StreamRng) -> (usize, Vec<Sym>) {
        let index = (rng::uniform01(rng) * self.len() as f64) as usize;
        let index = index.min(self.len() - 1);
        let out = self
            .word_flat(index)
            .iter()
            .map(|&w| rng::sample_cdf(&rng::cdf(ch.row(w as usize)), rng::uniform01(rng)) as Sym)
            .collect();
        (index, out)
    }

    /// `V(induced output, target^{⊗n})`.
    pub fn resolvability_gap(&self, ch: &Channel, target: &Pmf, mode: Mode, rng: Option<&mut StreamRng>) -> Result<GapEstimate> {
        self.check_channel(ch)?;
        if ch.output() != target.alphabet() {
            return Err(Error::AlphabetMismatch);
        }
        match mode {
            Mode::Exact => {
                let induced = self.induced_output_pmf(ch)?;
                let product = product_extend(target, self.n)?;
                Ok(GapEstimate { value: induced.variational_distance(&product)?, exact: true, undersampled: false })
            }
            Mode::MonteCarlo { trials } => {
                let Some(rng) = rng else { return invalid("Monte-Carlo estimate needs a random stream") };
                let counts = sample_counts(trials, || self.sample_output(ch, rng).1);
                Ok(plugin_gap(&counts, trials, target, self.n))
            }
        }
    }

    /// Flat indices whose word is jointly typical with `b`.
    pub fn list_size(&self, b: &[Sym], typ: &LetterTypicality) -> Vec<usize> {
        (0..self.len()).filter(|&w| typ.is_jointly_typical(&[self.word_flat(w), b])).collect()
    }
}

fn sample_counts(trials: usize, mut draw: impl FnMut() -> Vec<Sym>) -> BTreeMap<Vec<Sym>, usize> {
    let mut counts = BTreeMap::new();
    for _ in 0..trials {
        *counts.entry(draw()).or_insert(0) += 1;
    }
    counts
}

fn tuple_prob(target: &Pmf, x: &[Sym]) -> f64 {
    x.iter().map(|&s| target.prob(s as usize)).product()
}

fn undersampled(trials: usize, target: &Pmf, n: usize) -> bool {
    trials as f64 * math::exp2(-(n as f64) * target.entropy()) < MIN_EXPECTED_HITS
}

fn plugin_gap(counts: &BTreeMap<Vec<Sym>, usize>, trials: usize, target: &Pmf, n: usize) -> GapEstimate {
    let t = trials.max(1) as f64;
    let mut seen = Vec::with_capacity(counts.len());
    let mut terms = Vec::with_capacity(counts.len() + 1);
    for (x, &c) in counts {
        let p = tuple_prob(target, x);
        seen.push(p);
        terms.push(math::abs(c as f64 / t - p));
    }
    terms.push((1.0 - math::compensated_sum(seen)).max(0.0));
    GapEstimate { value: math::compensated_sum(terms), exact: false, undersampled: undersampled(trials, target, n) }
}

fn plugin_kl(counts: &BTreeMap<Vec<Sym>, usize>, trials: usize, target: &Pmf, n: usize) -> GapEstimate {
    let t = trials.max(1) as f64;
    let terms = counts.iter().map(|(x, &c)| {
        let f = c as f64 / t;
        let p = tuple_prob(target, x);
        if p > 0.0 {
            f * math::log2(f / p)
        } else {
            f64::INFINITY
        }
    });
    GapEstimate { value: math::compensated_sum(terms).max(0.0), exact: false, undersampled: undersampled(trials, target, n) }
}

/// Exact mixture `avg_w Π_t ch_t(c_t | w)` over the words of `words`.
///
/// `letter(t, w, c)` is the channel probability of output `c` at position `t`.
fn mixture_output<'a, I, F>(output: &Alphabet, n: usize, words: I, letter: F) -> Result<TuplePmf>
where
    I: Iterator<Item = &'a [Sym]>,
    F: Fn(usize, &[Sym], usize) -> f64,
{
    let k = output.len();
    let idx = TupleIndexer::new(k, n);
    check_budget(idx.count_wide(), EXACT_OUTPUT_BUDGET)?;
    let size = idx.count().expect("within budget");
    // identical words contribute identically
    let mut multiplicity: BTreeMap<&[Sym], usize> = BTreeMap::new();
    let mut total = 0usize;
    for w in words {
        *multiplicity.entry(w).or_insert(0) += 1;
        total += 1;
    }
    let mut acc = vec![0.0; size];
    let mut cur = Vec::with_capacity(size);
    let mut next = Vec::with_capacity(size);
    for (w, &m) in &multiplicity {
        cur.clear();
        cur.push(m as f64 / total as f64);
        for t in 0..n {
            next.clear();
            for &v in &cur {
                next.extend((0..k).map(|c| v * letter(t, w, c)));
            }
            core::mem::swap(&mut cur, &mut next);
        }
        acc.iter_mut().zip(&cur).for_each(|(a, &v)| *a += v);
    }
    Ok(TuplePmf::from_parts_unchecked(output.clone(), n, acc))
}

/// Storage of one conditional tier of a superposition codebook.
#[derive(Clone, Debug, PartialEq)]
enum Tier {
    /// All words, cloud by cloud.
    Stored(Vec<Sym>),
    /// Words of cloud `i` are regenerated from stream `(master, tag, i)` on demand.
    Regenerated { master: u64, tag: String, cdfs: Vec<Vec<f64>> },
}

/// Three-tier codebook: cloud centres `u(i)`, satellites `x(i, j, k)` and `y(i, l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperCodebook {
    n: usize,
    alphabets: [Alphabet; 3],
    u_rows: usize,
    x_rows: usize,
    x_cols: usize,
    y_rows: usize,
    u_words: Vec<Sym>,
    x_tier: Tier,
    y_tier: Tier,
}

/// Sizes of the four index sets of a superposition codebook.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuperDims {
    pub u_rows: usize,
    pub x_rows: usize,
    pub x_cols: usize,
    pub y_rows: usize,
}

fn conditional_cdfs(ch: &Channel) -> Vec<Vec<f64>> {
    (0..ch.input().len()).map(|u| rng::cdf(ch.row(u))).collect()
}

fn draw_cloud(master: u64, tag: &str, i: usize, cdfs: &[Vec<f64>], centre: &[Sym], words: usize) -> Vec<Sym> {
    let mut r = rng::stream(master, tag, i as u64);
    let mut out = Vec::with_capacity(words * centre.len());
    for _ in 0..words {
        for &u in centre {
            out.push(rng::sample_cdf(&cdfs[u as usize], rng::uniform01(&mut r)) as Sym);
        }
    }
    out
}

/// Draws a superposition codebook for the joint `(U, X, Y)`.
///
/// Cloud centres come from stream `(master, "<tag>/u", 0)`; the satellites of
/// cloud `i` from `(master, "<tag>/x", i)` and `(master, "<tag>/y", i)`. Tiers
/// too large for the codebook budget are regenerated on demand; the words are
/// the same either way.
pub fn gen_superposition(uxy: &JointPmf, n: usize, dims: SuperDims, master: u64, tag: &str) -> Result<SuperCodebook> {
    if uxy.arity() != 3 {
        return invalid("superposition codebook needs a joint of (U, X, Y)");
    }
    if n == 0 || dims.u_rows == 0 || dims.x_rows == 0 || dims.x_cols == 0 || dims.y_rows == 0 {
        return invalid("codebook dimensions must be positive");
    }
    check_codebook_budget(dims.u_rows, n)?;
    let per_cloud = dims.x_rows.saturating_mul(dims.x_cols);
    check_codebook_budget(per_cloud, n)?;
    check_codebook_budget(dims.y_rows, n)?;
    let u_pmf = uxy.marginal_pmf(0)?;
    let mut r = rng::stream(master, &format!("{tag}/u"), 0);
    let mut u_words = Vec::with_capacity(dims.u_rows * n);
    let u_cdf = u_pmf.cdf();
    for _ in 0..dims.u_rows {
        draw_word(&u_cdf, n, &mut r, &mut u_words);
    }
    let x_cdfs = conditional_cdfs(&uxy.conditional(0, 1)?);
    let y_cdfs = conditional_cdfs(&uxy.conditional(0, 2)?);
    let build = |sub: &str, cdfs: Vec<Vec<f64>>, words: usize| -> Tier {
        let tag = format!("{tag}/{sub}");
        let total = (dims.u_rows as u128) * (words as u128) * (n as u128);
        if total <= CODEBOOK_BUDGET as u128 {
            let mut all = Vec::with_capacity(total as usize);
            for i in 0..dims.u_rows {
                all.extend(draw_cloud(master, &tag, i, &cdfs, &u_words[i * n..(i + 1) * n], words));
            }
            Tier::Stored(all)
        } else {
            Tier::Regenerated { master, tag, cdfs }
        }
    };
    let x_tier = build("x", x_cdfs, per_cloud);
    let y_tier = build("y", y_cdfs, dims.y_rows);
    Ok(SuperCodebook {
        n,
        alphabets: [uxy.alphabet(0).clone(), uxy.alphabet(1).clone(), uxy.alphabet(2).clone()],
        u_rows: dims.u_rows,
        x_rows: dims.x_rows,
        x_cols: dims.x_cols,
        y_rows: dims.y_rows,
        u_words,
        x_tier,
        y_tier,
    })
}

impl SuperCodebook {
    /// A codebook with every word given. `x_words` holds the clouds in order,
    /// each `x_rows · x_cols` words; `y_words` likewise with `y_rows` words.
    pub fn from_words(
        n: usize,
        alphabets: [Alphabet; 3],
        dims: SuperDims,
        u_words: Vec<Sym>,
        x_words: Vec<Sym>,
        y_words: Vec<Sym>,
    ) -> Result<Self> {
        let expect = |len: usize, words: usize| -> Result<()> {
            if len != words * n {
                return Err(Error::LengthMismatch { expected: words * n, found: len });
            }
            Ok(())
        };
        expect(u_words.len(), dims.u_rows)?;
        expect(x_words.len(), dims.u_rows * dims.x_rows * dims.x_cols)?;
        expect(y_words.len(), dims.u_rows * dims.y_rows)?;
        Ok(Self {
            n,
            alphabets,
            u_rows: dims.u_rows,
            x_rows: dims.x_rows,
            x_cols: dims.x_cols,
            y_rows: dims.y_rows,
            u_words,
            x_tier: Tier::Stored(x_words),
            y_tier: Tier::Stored(y_words),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> SuperDims {
        SuperDims { u_rows: self.u_rows, x_rows: self.x_rows, x_cols: self.x_cols, y_rows: self.y_rows }
    }

    pub fn u_alphabet(&self) -> &Alphabet {
        &self.alphabets[0]
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.alphabets[1]
    }

    pub fn y_alphabet(&self) -> &Alphabet {
        &self.alphabets[2]
    }

    pub fn u_word(&self, i: usize) -> &[Sym] {
        &self.u_words[i * self.n..(i + 1) * self.n]
    }

    fn tier<'a>(&'a self, tier: &'a Tier, i: usize, words: usize) -> Cow<'a, [Sym]> {
        let len = words * self.n;
        match tier {
            Tier::Stored(all) => Cow::Borrowed(&all[i * len..(i + 1) * len]),
            Tier::Regenerated { master, tag, cdfs } => {
                Cow::Owned(draw_cloud(*master, tag, i, cdfs, self.u_word(i), words))
            }
        }
    }

    /// All satellites `x(i, j, k)` of cloud `i`, flat index `j · x_cols + k`.
    pub fn x_cloud(&self, i: usize) -> Cow<'_, [Sym]> {
        self.tier(&self.x_tier, i, self.x_rows * self.x_cols)
    }

    /// All satellites `y(i, l)` of cloud `i`.
    pub fn y_cloud(&self, i: usize) -> Cow<'_, [Sym]> {
        self.tier(&self.y_tier, i, self.y_rows)
    }

    pub fn x_word(&self, i: usize, j: usize, k: usize) -> Vec<Sym> {
        let w = (j * self.x_cols + k) * self.n;
        self.x_cloud(i)[w..w + self.n].to_vec()
    }

    pub fn y_word(&self, i: usize, l: usize) -> Vec<Sym> {
        let w = l * self.n;
        self.y_cloud(i)[w..w + self.n].to_vec()
    }

    /// Output distribution of `(u(I), x(I, J, K))` with uniform indices sent
    /// letterwise through `ch`, whose input `x · |U| + u` encodes the pair.
    pub fn induced_output_pmf(&self, ch: &Channel) -> Result<TuplePmf> {
        let ku = self.u_alphabet().len();
        if ch.input().len() != ku * self.x_alphabet().len() {
            return Err(Error::AlphabetMismatch);
        }
        let n = self.n;
        let per = self.x_rows * self.x_cols;
        // pair words: position t holds x_t · |U| + u_t
        let mut pairs = Vec::with_capacity(self.u_rows * per * n);
        for i in 0..self.u_rows {
            let u = self.u_word(i);
            let cloud = self.x_cloud(i);
            for w in 0..per {
                let x = &cloud[w * n..(w + 1) * n];
                pairs.extend(x.iter().zip(u).map(|(&x, &u)| (x as usize * ku + u as usize) as Sym));
            }
        }
        let words = pairs.chunks(n);
        mixture_output(ch.output(), n, words, |t, w, c| ch.prob(w[t] as usize, c))
    }

    fn sample_pair_output(&self, ch: &Channel, rng: &mut StreamRng) -> Vec<Sym> {
        let ku = self.u_alphabet().len();
        let pick = |r: &mut StreamRng, m: usize| ((rng::uniform01(r) * m as f64) as usize).min(m - 1);
        let i = pick(rng, self.u_rows);
        let w = pick(rng, self.x_rows * self.x_cols);
        let x = &self.x_cloud(i)[w * self.n..(w + 1) * self.n].to_vec();
        x.iter()
            .zip(self.u_word(i))
            .map(|(&x, &u)| {
                let row = ch.row(x as usize * ku + u as usize);
                rng::sample_cdf(&rng::cdf(row), rng::uniform01(rng)) as Sym
            })
            .collect()
    }
}

/// `D(induced output of the superposition code ‖ target^{⊗n})` in bits.
pub fn kl_gap_superposition(
    scb: &SuperCodebook,
    ch: &Channel,
    target: &Pmf,
    mode: Mode,
    rng: Option<&mut StreamRng>,
) -> Result<GapEstimate> {
    if ch.output() != target.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    match mode {
        Mode::Exact => {
            let induced = scb.induced_output_pmf(ch)?;
            let product = product_extend(target, scb.n())?;
            Ok(GapEstimate { value: induced.kl_divergence(&product)?, exact: true, undersampled: false })
        }
        Mode::MonteCarlo { trials } => {
            let Some(rng) = rng else { return invalid("Monte-Carlo estimate needs a random stream") };
            let counts = sample_counts(trials, || scb.sample_pair_output(ch, rng));
            Ok(plugin_kl(&counts, trials, target, scb.n()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_gives_constant_words() {
        let q = Pmf::from_masses(vec![0.0, 1.0, 0.0]).unwrap();
        let cb = gen_codebook(&q, 5, 3, 2, &mut rng::stream(1, "cb", 0), "cb").unwrap();
        assert!(cb.words().iter().all(|&s| s == 1));
    }

    #[test]
    fn generation_is_reproducible() {
        let q = Pmf::from_masses(vec![0.3, 0.7]).unwrap();
        let a = gen_codebook(&q, 6, 4, 4, &mut rng::stream(9, "cb", 2), "cb").unwrap();
        let b = gen_codebook(&q, 6, 4, 4, &mut rng::stream(9, "cb", 2), "cb").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_word_bsc_mixture_by_hand() {
        let cb = Codebook::from_words(Alphabet::binary(), 2, 2, 1, vec![0, 0, 1, 0]).unwrap();
        let ch = Channel::bsc(0.1).unwrap();
        let out = cb.induced_output_pmf(&ch).unwrap();
        let p = |a: u8, b: u8, w: [u8; 2]| {
            let f = |x: u8, y: u8| if x == y { 0.9 } else { 0.1 };
            f(a, w[0]) * f(b, w[1])
        };
        for (r, (a, b)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
            let want = 0.5 * p(a, b, [0, 0]) + 0.5 * p(a, b, [1, 0]);
            assert!((out.mass()[r] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn perfect_cover_has_zero_gap() {
        let n = 3;
        let ix = TupleIndexer::new(2, n);
        let words: Vec<Sym> = (0..8).flat_map(|r| ix.tuple(r)).collect();
        let cb = Codebook::from_words(Alphabet::binary(), n, 8, 1, words).unwrap();
        let ch = Channel::identity(Alphabet::binary());
        let g = cb.resolvability_gap(&ch, &Pmf::uniform(Alphabet::binary()), Mode::Exact, None).unwrap();
        assert!(g.value.abs() < 1e-15);
    }

    #[test]
    fn single_word_gap_is_direct() {
        let cb = Codebook::from_words(Alphabet::binary(), 2, 1, 1, vec![0, 1]).unwrap();
        let ch = Channel::bsc(0.2).unwrap();
        let target = Pmf::from_masses(vec![0.4, 0.6]).unwrap();
        let g = cb.resolvability_gap(&ch, &target, Mode::Exact, None).unwrap().value;
        let row = |w: usize, x: usize| if w == x { 0.8f64 } else { 0.2 };
        let t = [0.4f64, 0.6];
        let mut v = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                v += (row(0, a) * row(1, b) - t[a] * t[b]).abs();
            }
        }
        assert!((g - v).abs() < 1e-15);
    }

    #[test]
    fn list_size_support_rule() {
        let j = JointPmf::new(vec![Alphabet::binary(), Alphabet::indexed(3)], vec![0.3, 0.2, 0.0, 0.2, 0.3, 0.0]).unwrap();
        let cb = Codebook::from_words(Alphabet::binary(), 2, 2, 1, vec![0, 1, 1, 0]).unwrap();
        let typ = LetterTypicality::joint(&j, 100.0).unwrap();
        assert!(cb.list_size(&[2, 0], &typ).is_empty());
        assert_eq!(cb.list_size(&[0, 1], &typ), vec![0, 1]);
    }

    fn block_source() -> JointPmf {
        let mut m = vec![0.0; 16];
        for x in 0..4 {
            for y in 0..4 {
                if x / 2 == y / 2 {
                    m[x * 4 + y] = if x < 2 { 0.15 } else { 0.1 };
                }
            }
        }
        let j = JointPmf::new(vec![Alphabet::indexed(4), Alphabet::indexed(4)], m).unwrap();
        crate::gacskorner::common_part(&j).unwrap().joint_with_common(&j).unwrap()
    }

    #[test]
    fn satellites_stay_in_their_block() {
        let uxy = block_source();
        let dims = SuperDims { u_rows: 8, x_rows: 5, x_cols: 2, y_rows: 6 };
        let scb = gen_superposition(&uxy, 6, dims, 3, "sc").unwrap();
        for i in 0..8 {
            let u = scb.u_word(i).to_vec();
            for w in scb.x_cloud(i).chunks(6).chain(scb.y_cloud(i).chunks(6)) {
                assert!(w.iter().zip(&u).all(|(&s, &c)| s / 2 == c));
            }
        }
    }

    #[test]
    fn regenerated_tiers_match_stored_ones() {
        let uxy = block_source();
        let dims = SuperDims { u_rows: 3, x_rows: 4, x_cols: 2, y_rows: 5 };
        let stored = gen_superposition(&uxy, 5, dims, 11, "t").unwrap();
        let lazy = SuperCodebook {
            x_tier: Tier::Regenerated { master: 11, tag: "t/x".into(), cdfs: conditional_cdfs(&uxy.conditional(0, 1).unwrap()) },
            ..stored.clone()
        };
        for i in 0..3 {
            assert_eq!(stored.x_cloud(i), lazy.x_cloud(i));
        }
    }

    #[test]
    fn copy_satellites_repeat_the_centre() {
        // X = U: the X tier copies each cloud centre
        let j = JointPmf::new(vec![Alphabet::binary(), Alphabet::binary()], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let uxy = crate::gacskorner::common_part(&j).unwrap().joint_with_common(&j).unwrap();
        let scb = gen_superposition(&uxy, 4, SuperDims { u_rows: 4, x_rows: 2, x_cols: 3, y_rows: 2 }, 5, "c").unwrap();
        for i in 0..4 {
            for w in scb.x_cloud(i).chunks(4) {
                assert_eq!(w, scb.u_word(i));
            }
        }
    }
}
