mod common;

use common::*;
use nusc_core::codebook::{gen_codebook, gen_superposition, kl_gap_superposition, Codebook, SuperDims};
use nusc_core::gacskorner::common_part;
use nusc_core::rng;
use nusc_core::stats::{mean, median, std_error};
use nusc_core::sw::SwConfig;
use nusc_core::typicality::LetterTypicality;
use nusc_core::{math, Alphabet, Channel, JointPmf, Mode, Pmf};

#[test]
fn fair_symbols_are_balanced() {
    let q = Pmf::uniform(Alphabet::binary());
    let cb = gen_codebook(&q, 8, 4, 4, &mut rng::stream(17, "balance", 0), "balance").unwrap();
    let ones = cb.words().iter().filter(|&&s| s == 1).count() as f64;
    // 128 fair symbols: σ = sqrt(128)/2
    assert!((ones - 64.0).abs() <= 3.0 * 128f64.sqrt() / 2.0);
}

#[test]
fn single_word_output_is_a_row_product() {
    let q = Pmf::from_masses(vec![0.2, 0.5, 0.3]).unwrap();
    let cb = gen_codebook(&q, 3, 1, 1, &mut rng::stream(2, "one", 0), "one").unwrap();
    let ch = Channel::new(
        Alphabet::indexed(3),
        Alphabet::binary(),
        vec![vec![0.9, 0.1], vec![0.4, 0.6], vec![0.0, 1.0]],
    )
    .unwrap();
    let out = cb.induced_output_pmf(&ch).unwrap();
    let w = cb.word(0, 0);
    for (r, t) in (0..8).map(|r| (r, out.indexer().tuple(r))) {
        let want: f64 = t.iter().zip(w).map(|(&c, &s)| ch.prob(s as usize, c as usize)).product();
        assert!((out.mass()[r] - want).abs() < 1e-15);
    }
}

#[test]
fn induced_outputs_are_pmfs() {
    let mut r = rng("induced");
    for _ in 0..50 {
        let (k, m) = (between(&mut r, 1, 4), between(&mut r, 1, 3));
        let q = random_pmf(&mut r, k, 0.3);
        let rows: Vec<Vec<f64>> = (0..k).map(|_| random_masses(&mut r, m, 0.3)).collect();
        let ch = Channel::new(Alphabet::indexed(k), Alphabet::indexed(m), rows).unwrap();
        let (n, a, b) = (between(&mut r, 1, 5), between(&mut r, 1, 6), between(&mut r, 1, 3));
        let cb = gen_codebook(&q, n, a, b, &mut r, "induced").unwrap();
        let s: f64 = cb.induced_output_pmf(&ch).unwrap().mass().iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
    }
}

/// Median exact resolvability gap over `books` codebooks, BSC(0.1) from a uniform binary input.
fn median_gap(n: usize, rate: f64, books: u64) -> f64 {
    let q = Pmf::uniform(Alphabet::binary());
    let ch = Channel::bsc(0.1).unwrap();
    let rows = math::index_set_size(n, rate);
    let gaps: Vec<f64> = (0..books)
        .map(|c| {
            let cb = gen_codebook(&q, n, rows, 1, &mut rng::stream(40, "gap", c), "gap").unwrap();
            cb.resolvability_gap(&ch, &q, Mode::Exact, None).unwrap().value
        })
        .collect();
    median(&gaps)
}

#[test]
fn soft_covering_trend_above_and_below_the_threshold() {
    let i = dsbs(0.1).info_measures().mi(0, 1);
    let above: Vec<f64> = [4, 8].iter().map(|&n| median_gap(n, i + 0.2, 20)).collect();
    assert!(above[1] < above[0], "{above:?}");
    assert!(median_gap(10, i - 0.2, 20) >= 0.5);
}

#[test]
fn list_size_mean_below_bound() {
    let j = dsbs(0.1);
    let i = j.info_measures().mi(0, 1);
    let (n, delta, rate) = (8, 0.15, i + 0.1);
    let typ = LetterTypicality::joint(&j, delta).unwrap();
    let a = j.marginal_pmf(0).unwrap();
    let b_given_a = j.conditional(0, 1).unwrap();
    let rows = math::index_set_size(n, rate);
    let mut sizes = Vec::new();
    let mut r = rng("lists");
    for _ in 0..200 {
        let cb = gen_codebook(&a, n, rows, 1, &mut r, "lists").unwrap();
        // the observation is the channel output of the first codeword
        let b: Vec<u16> = cb.word(0, 0).iter().map(|&s| sample(&b_given_a, s, &mut r)).collect();
        sizes.push(cb.list_size(&b, &typ).len() as f64);
    }
    let bound = nusc_core::bounds::list_size_bound(n, delta, rate, i, (2, 2));
    assert!(mean(&sizes) <= bound + 3.0 * std_error(&sizes), "{} vs {bound}", mean(&sizes));
}

fn sample(ch: &Channel, s: u16, r: &mut rng::StreamRng) -> u16 {
    rng::sample_cdf(&rng::cdf(ch.row(s as usize)), rng::uniform01(r)) as u16
}

#[test]
fn huge_delta_lists_everything() {
    let j = dsbs(0.1);
    let cb = Codebook::from_words(Alphabet::binary(), 3, 4, 1, vec![0, 0, 0, 1, 1, 1, 0, 1, 0, 1, 0, 1]).unwrap();
    let typ = LetterTypicality::joint(&j, 1e6).unwrap();
    assert_eq!(cb.list_size(&[0, 1, 1], &typ), vec![0, 1, 2, 3]);
}

#[test]
fn cloud_centres_cover_like_the_coverage_formula() {
    let copy = JointPmf::new(vec![Alphabet::binary(), Alphabet::binary()], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
    let uxy = common_part(&copy).unwrap().joint_with_common(&copy).unwrap();
    let n = 4;
    let rows = math::index_set_size(n, 1.2);
    let mut hit = Vec::new();
    for c in 0..20 {
        let scb = gen_superposition(&uxy, n, SuperDims { u_rows: rows, x_rows: 1, x_cols: 1, y_rows: 1 }, 50, &format!("cov/{c}")).unwrap();
        let covered = (0..16u16)
            .filter(|&t| {
                let u: Vec<u16> = (0..4).map(|b| t >> (3 - b) & 1).collect();
                (0..rows).any(|i| scb.u_word(i) == u.as_slice())
            })
            .count();
        hit.push(covered as f64 / 16.0);
    }
    let formula = 1.0 - (1.0 - 2f64.powi(-(n as i32))).powi(rows as i32);
    assert!(mean(&hit) + 3.0 * std_error(&hit).max(1e-3) >= formula, "{} vs {formula}", mean(&hit));
}

/// A three-letter source: a certain letter, and a binary block with crossover 0.1.
fn two_block_source() -> JointPmf {
    let m = vec![0.5, 0.0, 0.0, 0.0, 0.225, 0.025, 0.0, 0.025, 0.225];
    JointPmf::new(vec![Alphabet::indexed(3), Alphabet::indexed(3)], m).unwrap()
}

#[test]
fn superposition_kl_decreases_at_the_corner_rates() {
    let source = two_block_source();
    let medians: Vec<f64> = [4, 8]
        .iter()
        .map(|&n| {
            let cfg = SwConfig { source: source.clone(), epsilon: 0.1, n, delta: 0.2 };
            let d = cfg.derive().unwrap();
            // (U, X) sent through Q_{Y|X}: input index x · |U| + u
            let y_given_x = source.conditional(0, 1).unwrap();
            let ku = d.uxy.dims()[0];
            let rows = (0..ku * 3).map(|c| y_given_x.row(c / ku).to_vec()).collect();
            let ch = Channel::new(Alphabet::indexed(ku * 3), Alphabet::indexed(3), rows).unwrap();
            let target = source.marginal_pmf(1).unwrap();
            let kls: Vec<f64> = (0..20)
                .map(|c| {
                    let scb = gen_superposition(&d.uxy, n, d.dims(), 60, &format!("kl/{c}")).unwrap();
                    kl_gap_superposition(&scb, &ch, &target, Mode::Exact, None).unwrap().value
                })
                .collect();
            median(&kls)
        })
        .collect();
    assert!(medians[1] < medians[0], "{medians:?}");
}
