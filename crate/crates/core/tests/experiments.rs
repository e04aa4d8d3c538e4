mod common;

use homlab::experiment::{run, to_csv, ExperimentError, ExperimentKind, ExperimentSpec, MIS_RATIO};
use homlab::graph::all_triples;

fn exact_fraction(n: usize, pred: impl Fn(&homlab::MultiGraph) -> bool) -> (u64, u64) {
    let triples = all_triples(n).unwrap();
    let hits = triples.iter().filter(|t| pred(&t.union())).count();
    (hits as u64, triples.len() as u64)
}

#[test]
fn exhaustive_rows_match_enumeration() {
    for k in [3, 4, 5, 7] {
        let spec = ExperimentSpec::new(ExperimentKind::HomFraction, vec![4, 6], 10, 1).with_cycle(k);
        for row in run(&spec, 2).unwrap() {
            let want = exact_fraction(row.n, |g| !common::all_cycle_homs(g, k).is_empty());
            assert_eq!((row.successes, row.samples), want, "n = {}, k = {k}", row.n);
            assert!(row.exhaustive);
            assert_eq!(row.stderr, 0.0);
        }
    }
    let spec = ExperimentSpec::new(ExperimentKind::MisTrend, vec![4, 6], 10, 1);
    for row in run(&spec, 2).unwrap() {
        let n = row.n as f64;
        let want = exact_fraction(row.n, |g| {
            let alpha = (0u32..1 << row.n)
                .filter(|&s| g.edges().iter().all(|&(u, v)| s >> u & 1 == 0 || s >> v & 1 == 0))
                .map(|s| s.count_ones())
                .max()
                .unwrap();
            (alpha as f64) < MIS_RATIO * n
        });
        assert_eq!((row.successes, row.samples), want);
    }
}

#[test]
fn zero_samples_rejected() {
    let spec = ExperimentSpec::new(ExperimentKind::Simplicity, vec![10], 0, 1);
    assert_eq!(run(&spec, 1), Err(ExperimentError::ZeroSamples));
}

#[test]
fn rows_reproducible_from_seed() {
    let spec = ExperimentSpec::new(ExperimentKind::HomFraction, vec![12, 16], 200, 77);
    let a = to_csv(&run(&spec, 1).unwrap());
    assert_eq!(a, to_csv(&run(&spec, 4).unwrap()));
    let other = ExperimentSpec { seed: 78, ..spec };
    assert_ne!(a, to_csv(&run(&other, 1).unwrap()));
}

#[test]
fn monte_carlo_rows_are_consistent() {
    let spec = ExperimentSpec::new(ExperimentKind::MisTrend, vec![20, 30], 100, 4);
    for row in run(&spec, 2).unwrap() {
        assert!(!row.exhaustive);
        assert_eq!(row.samples, 100);
        assert!(row.successes <= row.samples);
        assert!((row.fraction - row.successes as f64 / 100.0).abs() < 1e-15);
        let p = row.fraction;
        assert!((row.stderr - (p * (1.0 - p) / 100.0).sqrt()).abs() < 1e-15);
        let ratio = row.mean_mis_ratio.unwrap();
        assert!(ratio > 0.3 && ratio < 0.5);
    }
}
