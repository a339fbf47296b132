mod common;

use common::*;
use nusc_core::seed::{emulate_conditional, extract_intrinsic, pmf_from_seed, HeadRule, SeededSampler};
use nusc_core::{Pmf, SparsePmf, TupleIndexer};

#[test]
fn interval_construction_bounds_hold() {
    let mut r = rng("sampler");
    for case in 0..10_000 {
        let (target, ell, head) = sampler_instance(&mut r);
        let s = pmf_from_seed(&target, ell, &head).unwrap();
        let (dist, bound, dev) = sampler_oracle(&s, &target, &head);
        assert!(dist <= bound + 1e-12, "case {case}: {dist} > {bound}");
        assert!(dev <= 1.0 / ell as f64 + 1e-12, "case {case}: deviation {dev}");
        assert!((dist - s.construction_distance()).abs() < 1e-9);
        assert!(s.satisfies_bounds());
    }
}

#[test]
fn uniform_pair_tables() {
    let q = SparsePmf::uniform(2);
    let s = pmf_from_seed(&q, 4, &[0, 1]).unwrap();
    assert_eq!(s.table(), vec![0, 0, 1, 1]);
    assert_eq!(s.total_distance(), 0.0);
    let s = pmf_from_seed(&q, 3, &[0, 1]).unwrap();
    assert_eq!(s.cuts(), &[1, 3]);
    assert_eq!(s.table(), vec![0, 1, 1]);
    assert!((s.construction_distance() - 1.0 / 3.0).abs() < 1e-15);
    assert!((s.sampler_bound() - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn point_masses_are_exact() {
    for ell in [1, 2, 7, 1000] {
        let s = pmf_from_seed(&SparsePmf::point(5, 3), ell, &[3]).unwrap();
        assert_eq!(s.total_distance(), 0.0);
    }
}

#[test]
fn skewed_extractor_against_enumeration() {
    let p = Pmf::from_masses(vec![0.9, 0.1]).unwrap();
    let e = extract_intrinsic(&p, 8, 4).unwrap();
    let ix = TupleIndexer::new(2, 8);
    let mut bins = [0.0; 4];
    let mut cum = 0.0;
    let mut pmax: f64 = 0.0;
    for r in 0..256 {
        let m: f64 = ix.tuple(r).iter().map(|&s| p.prob(s as usize)).product();
        cum += m;
        pmax = pmax.max(m);
        let b = ((cum * 4.0 - 1e-9).ceil() as usize).clamp(1, 4) - 1;
        assert_eq!(e.bin(&ix.tuple(r)), b);
        bins[b] += m;
    }
    let v: f64 = bins.iter().map(|m| (m - 0.25).abs()).sum();
    assert!((e.uniformity_v() - v).abs() < 1e-12);
    assert!(v <= 2.0 * 4.0 * pmax);
    assert!((e.max_tuple_mass() - pmax).abs() < 1e-15);
}

#[test]
fn uniform_extractor_is_exact() {
    let e = extract_intrinsic(&Pmf::from_masses(vec![0.5, 0.5]).unwrap(), 2, 2).unwrap();
    assert_eq!(e.bin_pmf(), &[0.5, 0.5]);
    assert_eq!(e.uniformity_v(), 0.0);
    let one = extract_intrinsic(&Pmf::from_masses(vec![0.3, 0.7]).unwrap(), 3, 1).unwrap();
    assert_eq!(one.uniformity_v(), 0.0);
    assert!(extract_intrinsic(&Pmf::from_masses(vec![0.3, 0.7]).unwrap(), 2, 5).is_err());
}

#[test]
fn per_condition_emulation() {
    let mut r = rng("emu");
    let targets: Vec<(u64, SparsePmf)> =
        (0..4).map(|c| (c, SparsePmf::from(&random_pmf(&mut r, 6, 0.2)))).collect();
    let emu = emulate_conditional(targets.clone(), 1 << 10, &HeadRule::default()).unwrap();
    for (c, t) in &targets {
        let s = emu.sampler(*c).unwrap();
        let head = HeadRule::default().select(t);
        let hand = pmf_from_seed(t, 1 << 10, &head).unwrap();
        assert_eq!(s, &hand);
        let (dist, bound, _) = sampler_oracle(s, t, &head);
        assert!(dist <= bound + 1e-12);
    }
    assert!(emu.audit().clean());
    // a shared target gives one table for every condition
    let q = SparsePmf::from(&random_pmf(&mut r, 5, 0.0));
    let shared = emulate_conditional((0..3).map(|c| (c, q.clone())), 64, &HeadRule::All).unwrap();
    let alone = SeededSampler::from_rule(&q, 64, &HeadRule::All).unwrap();
    assert!((0..3).all(|c| shared.sampler(c) == Some(&alone)));
    let id = emulate_conditional((0..5).map(|c| (c, SparsePmf::point(5, c as usize))), 16, &HeadRule::default()).unwrap();
    assert!((0..5u64).all(|c| (0..16).all(|s| id.sample(c, s) == Some(c as usize))));
}
