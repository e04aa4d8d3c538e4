//! Seeded Monte Carlo drivers over random matching triples.
//!
//! Each experiment walks a list of vertex counts and reports, per `n`, how
//! many sampled unions have some property. When `((n-1)!!)^3` is at most
//! [`EXHAUSTIVE_LIMIT`] every triple is enumerated instead and the fraction
//! is exact.
//!
//! Sample `i` at vertex count `n` always draws from the same derived stream,
//! and rows only aggregate counts, so output does not depend on the number
//! of workers.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{all_triples, GraphError, MultiGraph, MIS_VERTEX_LIMIT};
use crate::hom::{find_homomorphism_with_budget, HomError, Target, DEFAULT_NODE_BUDGET};
use crate::sampler::{random_triple, task_rng, SampleError};

/// Largest number of ordered triples enumerated instead of sampled.
pub const EXHAUSTIVE_LIMIT: u128 = 100_000;
/// Independence ratio below which a sample counts as a success.
pub const MIS_RATIO: f64 = 0.4554;
pub const CSV_HEADER: &str = "kind,n,k,samples,successes,fraction,stderr,seed";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("samples must be at least 1")]
    ZeroSamples,
    #[error("no vertex counts given")]
    NoSizes,
    #[error("vertex count must be even and at least 2 (got {0})")]
    BadVertexCount(usize),
    #[error("target cycle length must be at least 3 (got {0})")]
    BadCycle(usize),
    #[error("independence number is limited to n <= {MIS_VERTEX_LIMIT} (got {0})")]
    TooLarge(usize),
    #[error("unknown experiment kind {0:?}")]
    UnknownKind(String),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Hom(#[from] HomError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    HomFraction,
    Simplicity,
    MisTrend,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::HomFraction => "hom-fraction",
            ExperimentKind::Simplicity => "simplicity",
            ExperimentKind::MisTrend => "mis-trend",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hom-fraction" => Ok(ExperimentKind::HomFraction),
            "simplicity" => Ok(ExperimentKind::Simplicity),
            "mis-trend" => Ok(ExperimentKind::MisTrend),
            other => Err(ExperimentError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub ns: Vec<usize>,
    pub samples: u64,
    /// Target cycle length; only read by [`ExperimentKind::HomFraction`].
    pub k: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, ns: Vec<usize>, samples: u64, seed: u64) -> Self {
        ExperimentSpec {
            kind,
            ns,
            samples,
            k: 7,
            seed,
        }
    }

    pub fn with_cycle(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.samples == 0 {
            return Err(ExperimentError::ZeroSamples);
        }
        if self.ns.is_empty() {
            return Err(ExperimentError::NoSizes);
        }
        if let Some(&n) = self.ns.iter().find(|&&n| n < 2 || n % 2 == 1) {
            return Err(ExperimentError::BadVertexCount(n));
        }
        match self.kind {
            ExperimentKind::HomFraction if self.k < 3 => Err(ExperimentError::BadCycle(self.k)),
            ExperimentKind::MisTrend => match self.ns.iter().find(|&&n| n > MIS_VERTEX_LIMIT) {
                Some(&n) => Err(ExperimentError::TooLarge(n)),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub kind: ExperimentKind,
    pub n: usize,
    pub k: Option<usize>,
    /// Number of triples examined; all `((n-1)!!)^3` of them when exhaustive.
    pub samples: u64,
    pub successes: u64,
    pub fraction: f64,
    /// `sqrt(p (1 - p) / samples)`, or 0 for an exhaustive row.
    pub stderr: f64,
    pub seed: u64,
    pub exhaustive: bool,
    /// Mean of `alpha(G) / n`, for the independence experiment only.
    pub mean_mis_ratio: Option<f64>,
}

impl ExperimentRow {
    pub fn to_csv_line(&self) -> String {
        let k = self.k.map(|k| k.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.kind, self.n, k, self.samples, self.successes, self.fraction, self.stderr, self.seed
        )
    }
}

pub fn to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

/// `((n-1)!!)^3`, saturating.
pub fn triple_count(n: usize) -> u128 {
    let mut m: u128 = 1;
    for j in (1..n).step_by(2) {
        m = m.saturating_mul(j as u128);
    }
    m.saturating_mul(m).saturating_mul(m)
}

pub fn is_exhaustive(n: usize) -> bool {
    triple_count(n) <= EXHAUSTIVE_LIMIT
}

/// Whether `alpha(g) < 0.4554 n`, with `alpha(g)`.
pub fn mis_success(g: &MultiGraph) -> Result<(bool, usize), ExperimentError> {
    let alpha = g.max_independent_set_size()?;
    Ok(((alpha as f64) < MIS_RATIO * g.vertex_count() as f64, alpha))
}

/// Whether `g` maps to `C_k`. Even cycles reduce to bipartiteness.
pub fn maps_to_cycle(g: &MultiGraph, k: usize) -> Result<bool, ExperimentError> {
    if k % 2 == 0 {
        return Ok(!g.has_loop() && g.is_bipartite());
    }
    let found = find_homomorphism_with_budget(g, Target::cycle(k)?, DEFAULT_NODE_BUDGET)?;
    Ok(found.is_some())
}

#[derive(Debug, Clone, Copy, Default)]
struct Count {
    samples: u64,
    successes: u64,
    mis_total: u64,
}

impl Count {
    fn merge(self, o: Count) -> Count {
        Count {
            samples: self.samples + o.samples,
            successes: self.successes + o.successes,
            mis_total: self.mis_total + o.mis_total,
        }
    }
}

fn judge(kind: ExperimentKind, k: usize, g: &MultiGraph) -> Result<Count, ExperimentError> {
    let (hit, mis) = match kind {
        ExperimentKind::HomFraction => (maps_to_cycle(g, k)?, 0),
        ExperimentKind::Simplicity => (g.is_simple(), 0),
        ExperimentKind::MisTrend => {
            let (hit, alpha) = mis_success(g)?;
            (hit, alpha as u64)
        }
    };
    Ok(Count {
        samples: 1,
        successes: hit as u64,
        mis_total: mis,
    })
}

fn stream(n: usize, i: u64) -> u64 {
    ((n as u64) << 40) | i
}

fn run_size(spec: &ExperimentSpec, n: usize) -> Result<ExperimentRow, ExperimentError> {
    let exhaustive = is_exhaustive(n);
    let count = if exhaustive {
        all_triples(n)?
            .par_iter()
            .map(|t| judge(spec.kind, spec.k, &t.union()))
            .try_reduce(Count::default, |a, b| Ok(a.merge(b)))?
    } else {
        (0..spec.samples)
            .into_par_iter()
            .map(|i| {
                let t = random_triple(n, &mut task_rng(spec.seed, stream(n, i)))?;
                judge(spec.kind, spec.k, &t.union())
            })
            .try_reduce(Count::default, |a, b| Ok(a.merge(b)))?
    };
    let p = count.successes as f64 / count.samples as f64;
    Ok(ExperimentRow {
        kind: spec.kind,
        n,
        k: (spec.kind == ExperimentKind::HomFraction).then_some(spec.k),
        samples: count.samples,
        successes: count.successes,
        fraction: p,
        stderr: if exhaustive {
            0.0
        } else {
            (p * (1.0 - p) / count.samples as f64).sqrt()
        },
        seed: spec.seed,
        exhaustive,
        mean_mis_ratio: (spec.kind == ExperimentKind::MisTrend)
            .then(|| count.mis_total as f64 / (count.samples as f64 * n as f64)),
    })
}

/// Runs any experiment on a pool of `workers` threads.
pub fn run(spec: &ExperimentSpec, workers: usize) -> Result<Vec<ExperimentRow>, ExperimentError> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    pool.install(|| spec.ns.iter().map(|&n| run_size(spec, n)).collect())
}

fn run_kind(
    kind: ExperimentKind,
    spec: &ExperimentSpec,
    workers: usize,
) -> Result<Vec<ExperimentRow>, ExperimentError> {
    run(&ExperimentSpec { kind, ..spec.clone() }, workers)
}

/// Fraction of unions with a homomorphism to `C_k`.
pub fn run_hom_fraction(spec: &ExperimentSpec, workers: usize) -> Result<Vec<ExperimentRow>, ExperimentError> {
    run_kind(ExperimentKind::HomFraction, spec, workers)
}

/// Fraction of unions without parallel edges.
pub fn run_simplicity(spec: &ExperimentSpec, workers: usize) -> Result<Vec<ExperimentRow>, ExperimentError> {
    run_kind(ExperimentKind::Simplicity, spec, workers)
}

/// Fraction of unions with `alpha < 0.4554 n`, plus the mean of `alpha / n`.
pub fn run_mis_trend(spec: &ExperimentSpec, workers: usize) -> Result<Vec<ExperimentRow>, ExperimentError> {
    run_kind(ExperimentKind::MisTrend, spec, workers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_cutoff() {
        assert_eq!(triple_count(4), 27);
        assert_eq!(triple_count(6), 3375);
        assert!(is_exhaustive(6));
        assert!(!is_exhaustive(8));
    }

    #[test]
    fn spec_validation() {
        let ok = ExperimentSpec::new(ExperimentKind::Simplicity, vec![4, 10], 5, 1);
        assert!(ok.validate().is_ok());
        let zero = ExperimentSpec { samples: 0, ..ok.clone() };
        assert_eq!(zero.validate(), Err(ExperimentError::ZeroSamples));
        let odd = ExperimentSpec { ns: vec![5], ..ok.clone() };
        assert_eq!(odd.validate(), Err(ExperimentError::BadVertexCount(5)));
        let hom = ExperimentSpec::new(ExperimentKind::HomFraction, vec![4], 5, 1).with_cycle(2);
        assert_eq!(hom.validate(), Err(ExperimentError::BadCycle(2)));
        let big = ExperimentSpec::new(ExperimentKind::MisTrend, vec![42], 5, 1);
        assert_eq!(big.validate(), Err(ExperimentError::TooLarge(42)));
    }

    #[test]
    fn seven_cycle_is_an_mis_success() {
        assert_eq!(mis_success(&MultiGraph::cycle(7)).unwrap(), (true, 3));
        assert_eq!(mis_success(&MultiGraph::cycle(8)).unwrap(), (false, 4));
    }

    #[test]
    fn csv_shape() {
        let spec = ExperimentSpec::new(ExperimentKind::Simplicity, vec![4], 10, 3);
        let csv = to_csv(&run(&spec, 1).unwrap());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("simplicity,4,,27,6,0.2222222222222222,0,3"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn kind_round_trip() {
        for k in [ExperimentKind::HomFraction, ExperimentKind::Simplicity, ExperimentKind::MisTrend] {
            assert_eq!(k.to_string().parse::<ExperimentKind>().unwrap(), k);
        }
        assert!("colouring".parse::<ExperimentKind>().is_err());
    }
}
