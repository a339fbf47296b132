use nusc::format::*;
use nusc_core::codebook::gen_codebook;
use nusc_core::rng::{stream, uniform01};
use nusc_core::seed::{emulate_conditional, HeadRule};
use nusc_core::{Alphabet, Channel, JointPmf, Pmf, SparsePmf};

fn masses(r: &mut nusc_core::rng::StreamRng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| uniform01(r) + 1e-3).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

fn same_to_12_digits(a: &[f64], b: &[f64]) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300), "{x} vs {y}");
    }
}

#[test]
fn pmf_round_trip() {
    let mut r = stream(1, "formats/pmf", 0);
    for k in 1..12 {
        let p = Pmf::new(Alphabet::indexed(k), masses(&mut r, k)).unwrap();
        let q = read_pmf(&write_pmf(&p)).unwrap();
        assert_eq!(p.alphabet(), q.alphabet());
        same_to_12_digits(p.mass(), q.mass());
    }
    let labelled = Pmf::new(Alphabet::new(["sun", "rain"]).unwrap(), vec![0.7, 0.3]).unwrap();
    assert_eq!(read_pmf(&write_pmf(&labelled)).unwrap(), labelled);
}

#[test]
fn channel_and_joint_round_trip() {
    let mut r = stream(1, "formats/matrix", 0);
    for (ki, ko) in [(1, 1), (2, 3), (4, 2), (5, 5)] {
        let rows: Vec<Vec<f64>> = (0..ki).map(|_| masses(&mut r, ko)).collect();
        let ch = Channel::new(Alphabet::indexed(ki), Alphabet::indexed(ko), rows).unwrap();
        let back = read_channel(&write_channel(&ch)).unwrap();
        for i in 0..ki {
            same_to_12_digits(ch.row(i), back.row(i));
        }
        let j = JointPmf::new(vec![Alphabet::indexed(ki), Alphabet::indexed(ko)], masses(&mut r, ki * ko)).unwrap();
        let back = read_joint(&write_joint(&j).unwrap()).unwrap();
        same_to_12_digits(j.mass(), back.mass());
    }
}

#[test]
fn comments_and_blank_lines_are_skipped() {
    let text = "# a joint\n\nx\\y 0 1\n0 0.45 0.05\n# middle\n1 0.05 0.45\n";
    let j = read_joint(text).unwrap();
    assert_eq!(j.prob(&[1, 1]), 0.45);
}

#[test]
fn malformed_tables_report_the_line() {
    let e = read_joint("x\\y 0 1\n0 0.5 0.5\n1 0.5\n").unwrap_err();
    assert!(e.to_string().contains("line 3"), "{e}");
    let e = read_pmf("a b\n0.5 zz\n").unwrap_err();
    assert!(e.to_string().contains("line 2"), "{e}");
    assert!(read_joint("x\\y 0 1\n0 0.6 0.6\n").is_err());
}

#[test]
fn emulator_rows_round_trip() {
    let targets = (0..5u64).map(|c| {
        let w: Vec<(usize, f64)> = (0..4).map(|i| (i, 1.0 + (i as u64 * c) as f64)).collect();
        (c, SparsePmf::from_weights(4, w).unwrap())
    });
    let em = emulate_conditional(targets, 7, &HeadRule::default()).unwrap();
    let rows = em.rows();
    assert_eq!(rows.len(), 5 * 7);
    assert_eq!(read_emulator_rows(&write_emulator_rows(&rows)).unwrap(), rows);
}

#[test]
fn codebook_round_trip() {
    let q = Pmf::new(Alphabet::new(["a", "b", "c"]).unwrap(), vec![0.2, 0.3, 0.5]).unwrap();
    let mut r = stream(1, "formats/codebook", 0);
    let cb = gen_codebook(&q, 6, 4, 3, &mut r, "t").unwrap();
    let back = read_codebook(q.alphabet(), &write_codebook(&cb)).unwrap();
    assert_eq!(back.words(), cb.words());
    assert_eq!((back.rows(), back.cols(), back.n()), (4, 3, 6));
}
