use std::collections::HashMap;

use homlab::graph::all_triples;
use homlab::sampler::{random_matching, random_triple, seeded_rng, task_rng};
use homlab::{MatchingTriple, PerfectMatching};

fn chi_square<K>(counts: &HashMap<K, u64>, cells: usize, draws: u64) -> f64 {
    let expected = draws as f64 / cells as f64;
    let seen: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // cells never drawn contribute `expected` each
    seen + (cells - counts.len()) as f64 * expected
}

#[test]
fn matchings_uniform_on_four_and_six_vertices() {
    // 0.1% critical values for 2 and 14 degrees of freedom
    for (n, cells, critical) in [(4, 3, 13.82), (6, 15, 36.12)] {
        let mut rng = seeded_rng(n as u64);
        let draws = 100_000;
        let mut counts: HashMap<PerfectMatching, u64> = HashMap::new();
        for _ in 0..draws {
            *counts.entry(random_matching(n, &mut rng).unwrap()).or_default() += 1;
        }
        assert_eq!(counts.len(), cells);
        let stat = chi_square(&counts, cells, draws);
        assert!(stat < critical, "n = {n}: chi-square {stat}");
    }
}

#[test]
fn all_27_triples_appear_evenly() {
    let mut rng = seeded_rng(27);
    let draws = 54_000;
    let mut counts: HashMap<MatchingTriple, u64> = HashMap::new();
    for _ in 0..draws {
        *counts.entry(random_triple(4, &mut rng).unwrap()).or_default() += 1;
    }
    let everything = all_triples(4).unwrap();
    assert_eq!(everything.len(), 27);
    assert!(everything.iter().all(|t| counts.contains_key(t)));
    // 26 degrees of freedom, 0.1% level
    assert!(chi_square(&counts, 27, draws) < 54.05);
}

#[test]
fn simple_fraction_at_four_vertices() {
    let simple = all_triples(4).unwrap().iter().filter(|t| t.union().is_simple()).count();
    assert_eq!(simple * 9, 27 * 2);
}

#[test]
fn task_streams_are_independent_of_order() {
    let forward: Vec<_> = (0..20).map(|i| random_triple(30, &mut task_rng(5, i)).unwrap()).collect();
    let backward: Vec<_> = (0..20).rev().map(|i| random_triple(30, &mut task_rng(5, i)).unwrap()).collect();
    assert!(forward.iter().eq(backward.iter().rev()));
}
