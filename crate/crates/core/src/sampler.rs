//! Uniform random perfect matchings and matching triples.
//!
//! A matching is drawn by shuffling `0..n` and pairing consecutive
//! positions; every one of the `(n-1)!!` matchings is hit by exactly
//! `2^{n/2} (n/2)!` permutations, so the law is uniform.
//!
//! Randomness comes from ChaCha8 streams. [`task_rng`] derives the stream for
//! task `i` from `(seed, i)`, which is what the experiment drivers use to
//! stay reproducible under any worker count.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{GraphError, MatchingTriple, PerfectMatching};

pub const DEFAULT_ATTEMPT_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("vertex count must be even and at least 2 (got {0})")]
    BadVertexCount(usize),
    #[error("minimum girth must be at least 2 (got {0})")]
    BadMinGirth(usize),
    #[error(
        "no triple with girth >= {min_girth} on {n} vertices after {attempts} attempts \
         (acceptance rate below {acceptance_upper:.2e})"
    )]
    AttemptCapExceeded {
        n: usize,
        min_girth: usize,
        attempts: u64,
        acceptance_upper: f64,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub n: usize,
    pub seed: u64,
    pub min_girth: Option<usize>,
    pub attempt_cap: u64,
}

impl SamplerConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        SamplerConfig {
            n,
            seed,
            min_girth: None,
            attempt_cap: DEFAULT_ATTEMPT_CAP,
        }
    }

    pub fn with_min_girth(mut self, g: usize) -> Self {
        self.min_girth = Some(g);
        self
    }

    fn validate(&self) -> Result<(), SampleError> {
        check_n(self.n)?;
        match self.min_girth {
            Some(g) if g < 2 => Err(SampleError::BadMinGirth(g)),
            _ => Ok(()),
        }
    }
}

fn check_n(n: usize) -> Result<(), SampleError> {
    if n < 2 || n % 2 == 1 {
        Err(SampleError::BadVertexCount(n))
    } else {
        Ok(())
    }
}

/// The random stream for the whole run.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The random stream owned by task `task` of a run seeded with `seed`.
pub fn task_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

pub fn random_matching<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PerfectMatching, SampleError> {
    check_n(n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let pairs = order.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    Ok(PerfectMatching::new(n, pairs)?)
}

pub fn random_triple<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<MatchingTriple, SampleError> {
    let m1 = random_matching(n, rng)?;
    let m2 = random_matching(n, rng)?;
    let m3 = random_matching(n, rng)?;
    Ok(MatchingTriple::new(m1, m2, m3)?)
}

/// Rejection-samples a triple whose union has girth at least `cfg.min_girth`.
///
/// Without a girth condition this is a single [`random_triple`] draw. The
/// returned count is the number of attempts used.
pub fn sample_min_girth<R: Rng + ?Sized>(
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<(MatchingTriple, u64), SampleError> {
    cfg.validate()?;
    let Some(min_girth) = cfg.min_girth else {
        return Ok((random_triple(cfg.n, rng)?, 1));
    };
    for attempt in 1..=cfg.attempt_cap {
        let t = random_triple(cfg.n, rng)?;
        if t.union().girth().is_none_or(|g| g >= min_girth) {
            return Ok((t, attempt));
        }
    }
    Err(SampleError::AttemptCapExceeded {
        n: cfg.n,
        min_girth,
        attempts: cfg.attempt_cap,
        // zero successes in `cap` trials: one-sided 95% bound is about 3/cap
        acceptance_upper: 3.0 / cfg.attempt_cap as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn two_vertices_unique() {
        let mut rng = seeded_rng(1);
        for _ in 0..10 {
            let m = random_matching(2, &mut rng).unwrap();
            assert_eq!(m.pairs(), &[(0, 1)]);
        }
    }

    #[test]
    fn odd_or_zero_rejected() {
        let mut rng = seeded_rng(1);
        assert_eq!(random_matching(5, &mut rng), Err(SampleError::BadVertexCount(5)));
        assert_eq!(random_matching(0, &mut rng), Err(SampleError::BadVertexCount(0)));
        assert!(random_triple(7, &mut rng).is_err());
    }

    #[test]
    fn four_vertex_matchings_within_three_sigma() {
        let mut rng = seeded_rng(1);
        let draws = 30_000;
        let mut freq: HashMap<PerfectMatching, usize> = HashMap::new();
        for _ in 0..draws {
            *freq.entry(random_matching(4, &mut rng).unwrap()).or_default() += 1;
        }
        assert_eq!(freq.len(), 3);
        let p = 1.0 / 3.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (m, c) in freq {
            let dev = (c as f64 - draws as f64 * p).abs();
            assert!(dev <= 3.0 * sigma, "{} drawn {} times", m, c);
        }
    }

    #[test]
    fn same_seed_same_triple() {
        let a = random_triple(50, &mut seeded_rng(7)).unwrap();
        let b = random_triple(50, &mut seeded_rng(7)).unwrap();
        assert_eq!(a, b);
        let c = random_triple(50, &mut task_rng(7, 3)).unwrap();
        let d = random_triple(50, &mut task_rng(7, 3)).unwrap();
        assert_eq!(c, d);
        assert_ne!(c, random_triple(50, &mut task_rng(7, 4)).unwrap());
    }

    #[test]
    fn sampled_unions_are_cubic() {
        let mut rng = seeded_rng(11);
        for n in [2, 4, 10, 64] {
            let g = random_triple(n, &mut rng).unwrap().union();
            assert!(g.degrees().iter().all(|&d| d == 3));
            assert_eq!(g.edge_count(), 3 * n / 2);
        }
    }

    #[test]
    fn girth_two_accepts_first_draw() {
        let cfg = SamplerConfig::new(20, 5).with_min_girth(2);
        let (t, attempts) = sample_min_girth(&cfg, &mut seeded_rng(5)).unwrap();
        assert_eq!(attempts, 1);
        assert_eq!(t, random_triple(20, &mut seeded_rng(5)).unwrap());
    }

    #[test]
    fn girth_four_gives_simple_triangle_free() {
        let cfg = SamplerConfig::new(20, 9).with_min_girth(4);
        let mut rng = seeded_rng(9);
        for _ in 0..20 {
            let (t, _) = sample_min_girth(&cfg, &mut rng).unwrap();
            let g = t.union();
            assert!(g.is_simple());
            assert!(g.girth().unwrap() >= 4);
        }
    }

    #[test]
    fn impossible_girth_hits_cap() {
        let mut cfg = SamplerConfig::new(10, 1).with_min_girth(50);
        cfg.attempt_cap = 2_000;
        let err = sample_min_girth(&cfg, &mut seeded_rng(1)).unwrap_err();
        assert!(matches!(err, SampleError::AttemptCapExceeded { attempts: 2_000, .. }));
    }

    #[test]
    fn bad_min_girth_rejected() {
        let cfg = SamplerConfig::new(10, 1).with_min_girth(1);
        assert_eq!(
            sample_min_girth(&cfg, &mut seeded_rng(1)).unwrap_err(),
            SampleError::BadMinGirth(1)
        );
    }
}
