//! Deterministic stand-ins for randomness.
//!
//! - [`SeededSampler`] turns a uniform seed on `[1, ℓ]` into an approximate
//!   sample of a target pmf by cutting `[1, ℓ]` at `⌊p_i ℓ⌋`, where `p_i` are
//!   cumulative masses of a head set.
//! - [`Extractor`] maps a source block to a nearly uniform bin by cumulative
//!   interval binning.
//! - [`ConditionalEmulator`] holds one sampler per condition value, which is
//!   how every stochastic encoder in this crate is made deterministic.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_budget, invalid};
use crate::math;
use crate::prob::{product_extend, sparse_l1};
use crate::{Error, Pmf, Result, SparsePmf, Sym, TupleIndexer, EXACT_BUDGET};

/// Default head-set mass threshold.
pub const DEFAULT_HEAD_MASS: f64 = 1.0 - 1e-6;

/// Numerical slack used when auditing bounds that hold exactly in real arithmetic.
pub const AUDIT_TOLERANCE: f64 = 1e-11;

/// Which outcomes of a target receive seed intervals.
#[derive(Clone, Debug, PartialEq)]
pub enum HeadRule {
    /// The whole support.
    All,
    /// The fewest highest-mass outcomes reaching this mass; ties go to the smaller index.
    MassThreshold(f64),
    Explicit(Vec<usize>),
}

impl Default for HeadRule {
    fn default() -> Self {
        HeadRule::MassThreshold(DEFAULT_HEAD_MASS)
    }
}

impl HeadRule {
    /// The head set in canonical (increasing index) order.
    pub fn select(&self, target: &SparsePmf) -> Vec<usize> {
        let mut head: Vec<usize> = match self {
            HeadRule::All => target.entries().iter().map(|e| e.0).collect(),
            HeadRule::MassThreshold(t) => {
                let mut by_mass: Vec<(usize, f64)> = target.entries().to_vec();
                by_mass.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                let mut acc = 0.0;
                let mut head = Vec::new();
                for (i, m) in by_mass {
                    if acc >= *t {
                        break;
                    }
                    acc += m;
                    head.push(i);
                }
                head
            }
            HeadRule::Explicit(v) => v.clone(),
        };
        head.sort_unstable();
        head.dedup();
        head
    }
}

/// A table from seeds `0..ℓ` (the values `1..=ℓ`) to outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct SeededSampler {
    target: SparsePmf,
    ell: usize,
    head: Vec<usize>,
    cuts: Vec<usize>,
}

/// Builds the seeded sampler of `target` with seed size `ell` on `head`.
///
/// Seeds above the last cut are not covered by the intervals and are sent to
/// the first head symbol so that the table is total.
pub fn pmf_from_seed(target: &SparsePmf, ell: usize, head: &[usize]) -> Result<SeededSampler> {
    if ell == 0 {
        return invalid("seed size must be at least 1");
    }
    let mut head = head.to_vec();
    head.sort_unstable();
    head.dedup();
    if head.is_empty() {
        return Err(Error::EmptyHeadSet);
    }
    if let Some(&bad) = head.iter().find(|&&b| b >= target.size()) {
        return Err(Error::SymbolOutOfRange { symbol: bad, size: target.size() });
    }
    let mut cumulative = 0.0;
    let mut comp = 0.0;
    let cuts = head
        .iter()
        .map(|&b| {
            // Kahan summation keeps the cumulative masses on integers where they should be
            let y = target.prob(b) - comp;
            let t = cumulative + y;
            comp = (t - cumulative) - y;
            cumulative = t;
            (math::snapped_floor(cumulative * ell as f64) as usize).min(ell)
        })
        .collect();
    Ok(SeededSampler { target: target.clone(), ell, head, cuts })
}

impl SeededSampler {
    pub fn from_rule(target: &SparsePmf, ell: usize, rule: &HeadRule) -> Result<Self> {
        pmf_from_seed(target, ell, &rule.select(target))
    }

    pub fn target(&self) -> &SparsePmf {
        &self.target
    }

    pub fn seed_size(&self) -> usize {
        self.ell
    }

    pub fn head(&self) -> &[usize] {
        &self.head
    }

    /// The cut points `N_1 <= ... <= N_M`.
    pub fn cuts(&self) -> &[usize] {
        &self.cuts
    }

    /// Target mass outside the head set.
    pub fn outside_mass(&self) -> f64 {
        let inside = math::compensated_sum(self.head.iter().map(|&b| self.target.prob(b)));
        (1.0 - inside).max(0.0)
    }

    /// Output for seed `s` in `0..ℓ`.
    pub fn lookup(&self, seed: usize) -> usize {
        assert!(seed < self.ell, "seed {seed} out of range for seed size {}", self.ell);
        let i = self.cuts.partition_point(|&n| n < seed + 1);
        if i < self.head.len() {
            self.head[i]
        } else {
            self.head[0]
        }
    }

    pub fn table(&self) -> Vec<usize> {
        (0..self.ell).map(|s| self.lookup(s)).collect()
    }

    /// Seeds not covered by any interval, as a fraction of `ℓ`.
    pub fn overflow_mass(&self) -> f64 {
        (self.ell - self.cuts.last().copied().unwrap_or(0)) as f64 / self.ell as f64
    }

    /// Masses the interval construction gives each head symbol, `(N_i - N_{i-1}) / ℓ`.
    /// They sum to `N_M / ℓ`; the overflow seeds are left out.
    pub fn construction_measure(&self) -> Vec<(usize, f64)> {
        let mut prev = 0;
        self.head
            .iter()
            .zip(&self.cuts)
            .map(|(&b, &n)| {
                let m = (n - prev) as f64 / self.ell as f64;
                prev = n;
                (b, m)
            })
            .collect()
    }

    /// Distribution of the table output under a uniform seed.
    pub fn output_pmf(&self) -> SparsePmf {
        let mut w = self.construction_measure();
        w.push((self.head[0], self.overflow_mass()));
        SparsePmf::from_weights(self.target.size(), w).expect("seed table has positive total mass")
    }

    /// Output distribution when the seed has pmf `seed_pmf` over `0..ℓ`.
    pub fn output_pmf_with_seed(&self, seed_pmf: &[f64]) -> Result<SparsePmf> {
        if seed_pmf.len() != self.ell {
            return Err(Error::LengthMismatch { expected: self.ell, found: seed_pmf.len() });
        }
        let w = seed_pmf.iter().enumerate().map(|(s, &m)| (self.lookup(s), m)).collect();
        SparsePmf::from_weights(self.target.size(), w)
    }

    /// `Σ_b |Q(b) - q(b)|` for the interval construction measure.
    pub fn construction_distance(&self) -> f64 {
        let mut c = self.construction_measure();
        c.retain(|e| e.1 > 0.0);
        sparse_l1(&c, self.target.entries())
    }

    /// `Σ_b |Q(b) - q(b)|` for the total table under a uniform seed.
    pub fn total_distance(&self) -> f64 {
        self.output_pmf().l1_to(self.target.entries())
    }

    /// `ε + M/ℓ`.
    pub fn sampler_bound(&self) -> f64 {
        self.outside_mass() + self.head.len() as f64 / self.ell as f64
    }

    /// `max_i |q(b_i) - Q(b_i)|` over the head set, for the construction measure.
    pub fn max_head_deviation(&self) -> f64 {
        self.construction_measure()
            .iter()
            .map(|&(b, m)| math::abs(self.target.prob(b) - m))
            .fold(0.0, f64::max)
    }

    /// Whether the construction meets both its bounds.
    pub fn satisfies_bounds(&self) -> bool {
        self.construction_distance() <= self.sampler_bound() + AUDIT_TOLERANCE
            && self.max_head_deviation() <= 1.0 / self.ell as f64 + AUDIT_TOLERANCE
    }
}

/// Cumulative-interval binning of `n`-blocks of an i.i.d. source into `bins` bins.
#[derive(Clone, Debug, PartialEq)]
pub struct Extractor {
    source: Pmf,
    block_len: usize,
    bins: usize,
    bin_of: Vec<u32>,
    bin_mass: Vec<f64>,
    max_tuple_mass: f64,
}

pub fn extract_intrinsic(p: &Pmf, n: usize, bins: usize) -> Result<Extractor> {
    let count = TupleIndexer::new(p.len(), n).count_wide();
    check_budget(count, EXACT_BUDGET)?;
    if bins == 0 || bins as u128 > count {
        return invalid(alloc::format!("extractor needs 1 <= bins <= {count}, got {bins}"));
    }
    if bins > u32::MAX as usize {
        return invalid("too many bins");
    }
    let tuples = product_extend(p, n)?;
    let b = bins as f64;
    let mut bin_of = Vec::with_capacity(tuples.mass().len());
    let mut bin_mass = vec![0.0; bins];
    let (mut f, mut comp) = (0.0f64, 0.0f64);
    for &m in tuples.mass() {
        let y = m - comp;
        let t = f + y;
        comp = (t - f) - y;
        f = t;
        let bin = (math::snapped_ceil(f * b) as usize).clamp(1, bins) - 1;
        bin_of.push(bin as u32);
        bin_mass[bin] += m;
    }
    let max_tuple_mass = tuples.max_mass();
    let ex = Extractor { source: p.clone(), block_len: n, bins, bin_of, bin_mass, max_tuple_mass };
    let worst = ex.bin_mass.iter().map(|&m| math::abs(m - 1.0 / b)).fold(0.0, f64::max);
    if worst > max_tuple_mass + AUDIT_TOLERANCE || ex.uniformity_v() > ex.bound() + AUDIT_TOLERANCE {
        return invalid("extractor bin masses violate the interval bound");
    }
    Ok(ex)
}

impl Extractor {
    pub fn source(&self) -> &Pmf {
        &self.source
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Bin of a block, in `0..bins`.
    pub fn bin(&self, block: &[Sym]) -> usize {
        assert_eq!(block.len(), self.block_len, "block length");
        self.bin_of[TupleIndexer::new(self.source.len(), self.block_len).rank(block)] as usize
    }

    pub fn bin_of_rank(&self, rank: usize) -> usize {
        self.bin_of[rank] as usize
    }

    /// Distribution of the bin under the i.i.d. source.
    pub fn bin_pmf(&self) -> &[f64] {
        &self.bin_mass
    }

    pub fn max_tuple_mass(&self) -> f64 {
        self.max_tuple_mass
    }

    /// `V(bin pmf, uniform)`.
    pub fn uniformity_v(&self) -> f64 {
        let u = 1.0 / self.bins as f64;
        math::compensated_sum(self.bin_mass.iter().map(|&m| math::abs(m - u)))
    }

    /// `2 · bins · p_max`.
    pub fn bound(&self) -> f64 {
        2.0 * self.bins as f64 * self.max_tuple_mass
    }
}

/// Per-condition seeded samplers sharing one seed size.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalEmulator {
    seed_bins: usize,
    rule: HeadRule,
    samplers: BTreeMap<u64, SeededSampler>,
}

/// Outcome of checking every sampler of an emulator against its bounds.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EmulatorAudit {
    pub conditions: usize,
    /// Samplers whose construction distance exceeds `ε + M/ℓ`.
    pub violations: usize,
    /// Samplers with a head symbol off by more than `1/ℓ`.
    pub symbol_violations: usize,
    /// Largest `distance - bound` seen (negative when all are within).
    pub worst_slack: f64,
    /// Largest distance of the total table, overflow included.
    pub max_total_distance: f64,
}

impl EmulatorAudit {
    pub fn merge(&mut self, other: &EmulatorAudit) {
        if other.conditions == 0 {
            return;
        }
        if self.conditions == 0 {
            *self = *other;
            return;
        }
        self.conditions += other.conditions;
        self.violations += other.violations;
        self.symbol_violations += other.symbol_violations;
        self.worst_slack = self.worst_slack.max(other.worst_slack);
        self.max_total_distance = self.max_total_distance.max(other.max_total_distance);
    }

    pub fn record(&mut self, s: &SeededSampler) {
        let slack = s.construction_distance() - s.sampler_bound();
        let first = self.conditions == 0;
        self.conditions += 1;
        if slack > AUDIT_TOLERANCE {
            self.violations += 1;
        }
        if s.max_head_deviation() > 1.0 / s.seed_size() as f64 + AUDIT_TOLERANCE {
            self.symbol_violations += 1;
        }
        self.worst_slack = if first { slack } else { self.worst_slack.max(slack) };
        self.max_total_distance = self.max_total_distance.max(s.total_distance());
    }

    pub fn clean(&self) -> bool {
        self.violations == 0 && self.symbol_violations == 0
    }
}

/// One `(condition, seed, output)` entry of an emulator table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmulatorRow {
    pub condition: u64,
    pub seed: usize,
    pub output: usize,
}

pub fn emulate_conditional<I>(targets: I, seed_bins: usize, rule: &HeadRule) -> Result<ConditionalEmulator>
where
    I: IntoIterator<Item = (u64, SparsePmf)>,
{
    let mut em = ConditionalEmulator::new(seed_bins, rule.clone())?;
    for (c, t) in targets {
        em.insert(c, &t)?;
    }
    Ok(em)
}

impl ConditionalEmulator {
    pub fn new(seed_bins: usize, rule: HeadRule) -> Result<Self> {
        if seed_bins == 0 {
            return invalid("seed_bins must be at least 1");
        }
        Ok(Self { seed_bins, rule, samplers: BTreeMap::new() })
    }

    pub fn seed_bins(&self) -> usize {
        self.seed_bins
    }

    pub fn rule(&self) -> &HeadRule {
        &self.rule
    }

    pub fn insert(&mut self, condition: u64, target: &SparsePmf) -> Result<&SeededSampler> {
        let s = SeededSampler::from_rule(target, self.seed_bins, &self.rule)?;
        Ok(self.samplers.entry(condition).or_insert(s))
    }

    pub fn sampler(&self, condition: u64) -> Option<&SeededSampler> {
        self.samplers.get(&condition)
    }

    pub fn sample(&self, condition: u64, seed: usize) -> Option<usize> {
        self.samplers.get(&condition).map(|s| s.lookup(seed))
    }

    pub fn len(&self) -> usize {
        self.samplers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samplers.is_empty()
    }

    pub fn audit(&self) -> EmulatorAudit {
        let mut a = EmulatorAudit::default();
        for s in self.samplers.values() {
            a.record(s);
        }
        a
    }

    pub fn rows(&self) -> Vec<EmulatorRow> {
        self.samplers
            .iter()
            .flat_map(|(&condition, s)| {
                (0..s.seed_size()).map(move |seed| EmulatorRow { condition, seed, output: s.lookup(seed) })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Alphabet;

    fn sp(m: &[f64]) -> SparsePmf {
        SparsePmf::from(&Pmf::from_masses(m.to_vec()).unwrap())
    }

    #[test]
    fn uniform_pair_with_four_seeds() {
        let s = pmf_from_seed(&sp(&[0.5, 0.5]), 4, &[0, 1]).unwrap();
        assert_eq!(s.table(), vec![0, 0, 1, 1]);
        assert_eq!(s.cuts(), &[2, 4]);
        assert_eq!(s.total_distance(), 0.0);
    }

    #[test]
    fn uniform_pair_with_three_seeds() {
        let s = pmf_from_seed(&sp(&[0.5, 0.5]), 3, &[0, 1]).unwrap();
        assert_eq!(s.cuts(), &[1, 3]);
        let out = s.output_pmf();
        assert!((out.prob(0) - 1.0 / 3.0).abs() < 1e-15);
        // |1/3 - 1/2| + |2/3 - 1/2|
        assert!((s.total_distance() - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.sampler_bound() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn point_mass_is_exact() {
        for ell in [1, 2, 7, 100] {
            let s = SeededSampler::from_rule(&sp(&[0.0, 1.0, 0.0]), ell, &HeadRule::default()).unwrap();
            assert_eq!(s.total_distance(), 0.0);
        }
    }

    #[test]
    fn empty_head_is_an_error() {
        assert_eq!(pmf_from_seed(&sp(&[0.5, 0.5]), 3, &[]), Err(Error::EmptyHeadSet));
    }

    #[test]
    fn head_rule_threshold_ties_by_index() {
        let t = sp(&[0.25, 0.25, 0.25, 0.25]);
        assert_eq!(HeadRule::MassThreshold(0.5).select(&t), vec![0, 1]);
        let t = sp(&[0.1, 0.5, 0.4]);
        assert_eq!(HeadRule::MassThreshold(0.85).select(&t), vec![1, 2]);
    }

    #[test]
    fn no_total_map_meets_the_bound_when_outside_mass_is_large() {
        // one head symbol of mass 0.1, eighteen others of 0.05, two seeds
        let mut m = vec![0.1];
        m.extend(core::iter::repeat_n(0.05, 18));
        let t = sp(&m);
        let s = pmf_from_seed(&t, 2, &[0]).unwrap();
        let bound = s.sampler_bound();
        assert!((bound - 1.4).abs() < 1e-12);
        assert!(s.construction_distance() <= bound + AUDIT_TOLERANCE);
        // any total map puts all seed mass on at most two symbols
        let best_total = {
            let mut best = f64::INFINITY;
            for a in 0..m.len() {
                for b in 0..m.len() {
                    let mut w = vec![(a, 0.5), (b, 0.5)];
                    w.sort_by_key(|e| e.0);
                    let q = SparsePmf::from_weights(m.len(), w).unwrap();
                    best = best.min(q.l1_to(t.entries()));
                }
            }
            best
        };
        assert!(best_total > bound);
        assert!(s.total_distance() <= bound + s.overflow_mass() + AUDIT_TOLERANCE);
    }

    #[test]
    fn extractor_examples() {
        let half = Pmf::uniform(Alphabet::binary());
        let e = extract_intrinsic(&half, 2, 2).unwrap();
        assert_eq!(e.bin_pmf(), &[0.5, 0.5]);
        assert_eq!(e.uniformity_v(), 0.0);
        let p = Pmf::from_masses(vec![0.9, 0.1]).unwrap();
        assert_eq!(extract_intrinsic(&p, 3, 1).unwrap().uniformity_v(), 0.0);
        assert!(extract_intrinsic(&p, 2, 5).is_err());
    }

    #[test]
    fn extractor_matches_enumeration() {
        let p = Pmf::from_masses(vec![0.9, 0.1]).unwrap();
        let e = extract_intrinsic(&p, 8, 4).unwrap();
        // independent enumeration of all 256 tuples, cumulative in lex order
        let mut bins = [0.0f64; 4];
        let mut f = 0.0;
        for r in 0..256u32 {
            let ones = r.count_ones() as i32;
            let m = 0.9f64.powi(8 - ones) * 0.1f64.powi(ones);
            f += m;
            let b = ((f * 4.0 - 1e-12).ceil() as usize).clamp(1, 4) - 1;
            bins[b] += m;
        }
        let v: f64 = bins.iter().map(|m| (m - 0.25).abs()).sum();
        assert!((e.uniformity_v() - v).abs() < 1e-12);
        assert!(e.uniformity_v() <= 2.0 * 4.0 * 0.9f64.powi(8));
    }

    #[test]
    fn emulator_examples() {
        let targets = (0..3u64).map(|c| (c, SparsePmf::point(3, c as usize)));
        let em = emulate_conditional(targets, 8, &HeadRule::default()).unwrap();
        for c in 0..3u64 {
            for s in 0..8 {
                assert_eq!(em.sample(c, s), Some(c as usize));
            }
        }
        let q = sp(&[0.2, 0.3, 0.5]);
        let em = emulate_conditional((0..4u64).map(|c| (c, q.clone())), 10, &HeadRule::All).unwrap();
        let direct = pmf_from_seed(&q, 10, &[0, 1, 2]).unwrap();
        assert!(em.rows().iter().all(|r| r.output == direct.lookup(r.seed)));
        assert!(em.audit().clean());
    }
}
