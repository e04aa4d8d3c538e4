//! Homomorphisms into cycles and circular cliques.
//!
//! Search is backtracking over bitset domains with full arc consistency
//! maintained after every assignment. Targets have at most 64 vertices so a
//! domain fits in one `u64`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use thiserror::Error;

use crate::graph::{MatchingTriple, MultiGraph};

/// Largest target supported by the bitset domains.
pub const MAX_TARGET_SIZE: usize = 64;
/// Exhaustive counting refuses instances with more than this many maps.
pub const COUNT_BUDGET: u128 = 100_000_000;
/// Default node budget for a single backtracking search.
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomError {
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("map has {labels} labels but the graph has {vertices} vertices")]
    LengthMismatch { labels: usize, vertices: usize },
    #[error("label {label} at vertex {vertex} is not a vertex of the target")]
    LabelOutOfRange { vertex: usize, label: usize },
    #[error("map is not a homomorphism (edge {0}-{1} is not preserved)")]
    NotHomomorphism(usize, usize),
    #[error("operation needs a cycle target")]
    NeedsCycle,
    #[error("tightening needs an odd cycle (got C{0})")]
    EvenCycle(usize),
    #[error("operation needs the 7-cycle (got C{0})")]
    NeedsSevenCycle(usize),
    #[error("{count} candidate maps exceed the enumeration budget of {budget}")]
    OverBudget { count: u128, budget: u128 },
    #[error("search exceeded {0} nodes")]
    NodeBudgetExceeded(u64),
    #[error("malformed map file, line {line}: {reason}")]
    MapSyntax { line: usize, reason: String },
}

/// The cycle `C_k` on residues mod `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CycleTarget {
    k: usize,
}

impl CycleTarget {
    pub fn new(k: usize) -> Result<Self, HomError> {
        if !(3..=MAX_TARGET_SIZE).contains(&k) {
            return Err(HomError::InvalidTarget(format!(
                "cycle length must be in 3..={} (got {})",
                MAX_TARGET_SIZE, k
            )));
        }
        Ok(CycleTarget { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// The circular clique `K_{p/q}`: `x ~ y` iff `q <= |x - y| <= p - q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CircularClique {
    p: usize,
    q: usize,
}

impl CircularClique {
    pub fn new(p: usize, q: usize) -> Result<Self, HomError> {
        if q == 0 || p < 2 * q || p > MAX_TARGET_SIZE {
            return Err(HomError::InvalidTarget(format!(
                "K_{}/{} needs q >= 1, p >= 2q and p <= {}",
                p, q, MAX_TARGET_SIZE
            )));
        }
        Ok(CircularClique { p, q })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Cycle(CycleTarget),
    Clique(CircularClique),
}

impl Target {
    pub fn cycle(k: usize) -> Result<Self, HomError> {
        CycleTarget::new(k).map(Target::Cycle)
    }

    pub fn clique(p: usize, q: usize) -> Result<Self, HomError> {
        CircularClique::new(p, q).map(Target::Clique)
    }

    pub fn size(&self) -> usize {
        match self {
            Target::Cycle(c) => c.k,
            Target::Clique(c) => c.p,
        }
    }

    pub fn adjacent(&self, x: usize, y: usize) -> bool {
        let n = self.size();
        if x >= n || y >= n {
            return false;
        }
        let d = x.abs_diff(y);
        match self {
            Target::Cycle(c) => d == 1 || d == c.k - 1,
            Target::Clique(c) => c.q <= d && d <= c.p - c.q,
        }
    }

    /// `masks[x]` has bit `y` set iff `x ~ y`.
    pub fn adjacency_masks(&self) -> Vec<u64> {
        let n = self.size();
        (0..n)
            .map(|x| (0..n).filter(|&y| self.adjacent(x, y)).fold(0u64, |m, y| m | 1 << y))
            .collect()
    }

    fn full_mask(&self) -> u64 {
        let n = self.size();
        if n == 64 {
            u64::MAX
        } else {
            (1u64 << n) - 1
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Cycle(c) => write!(f, "cycle:{}", c.k),
            Target::Clique(c) => write!(f, "clique:{}/{}", c.p, c.q),
        }
    }
}

/// Parses `cycle:K` or `clique:P/Q`.
impl FromStr for Target {
    type Err = HomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HomError::InvalidTarget(format!("expected cycle:K or clique:P/Q, got {:?}", s));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "cycle" => Target::cycle(rest.parse().map_err(|_| bad())?),
            "clique" => {
                let (p, q) = rest.split_once('/').ok_or_else(bad)?;
                Target::clique(p.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?)
            }
            _ => Err(bad()),
        }
    }
}

/// A vertex labelling together with the target it is meant for.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HomMap {
    pub labels: Vec<usize>,
    pub target: Target,
}

impl HomMap {
    pub fn new(labels: Vec<usize>, target: Target) -> Self {
        HomMap { labels, target }
    }

    /// Writes one `v label` line per vertex.
    pub fn to_text(&self) -> String {
        self.labels
            .iter()
            .enumerate()
            .map(|(v, l)| format!("{} {}\n", v, l))
            .collect()
    }

    /// Reads the `v label` format. Every vertex in `0..vertex_count` must appear once.
    pub fn parse(text: &str, vertex_count: usize, target: Target) -> Result<Self, HomError> {
        let mut labels = vec![None; vertex_count];
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let body = line.trim();
            if body.is_empty() {
                continue;
            }
            let syntax = |reason: String| HomError::MapSyntax {
                line: line_no,
                reason,
            };
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(syntax(format!("expected `v label`, got {:?}", body)));
            }
            let v: usize = fields[0]
                .parse()
                .map_err(|_| syntax(format!("bad vertex {:?}", fields[0])))?;
            let l: usize = fields[1]
                .parse()
                .map_err(|_| syntax(format!("bad label {:?}", fields[1])))?;
            if v >= vertex_count {
                return Err(syntax(format!("vertex {} out of range", v)));
            }
            if l >= target.size() {
                return Err(HomError::LabelOutOfRange { vertex: v, label: l });
            }
            if labels[v].replace(l).is_some() {
                return Err(syntax(format!("vertex {} labelled twice", v)));
            }
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(v, l)| {
                l.ok_or(HomError::MapSyntax {
                    line: 0,
                    reason: format!("vertex {} has no label", v),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HomMap { labels, target })
    }
}

fn check_labels(g: &MultiGraph, m: &HomMap) -> Result<(), HomError> {
    if m.labels.len() != g.vertex_count() {
        return Err(HomError::LengthMismatch {
            labels: m.labels.len(),
            vertices: g.vertex_count(),
        });
    }
    if let Some((v, &l)) = m.labels.iter().enumerate().find(|(_, &l)| l >= m.target.size()) {
        return Err(HomError::LabelOutOfRange { vertex: v, label: l });
    }
    Ok(())
}

fn first_broken_edge(g: &MultiGraph, m: &HomMap) -> Option<(usize, usize)> {
    g.edges()
        .iter()
        .copied()
        .find(|&(u, v)| !m.target.adjacent(m.labels[u], m.labels[v]))
}

/// True iff every edge of `g` lands on an edge of the target.
pub fn verify_homomorphism(g: &MultiGraph, m: &HomMap) -> Result<bool, HomError> {
    check_labels(g, m)?;
    Ok(first_broken_edge(g, m).is_none())
}

fn require_valid_cycle_map(g: &MultiGraph, m: &HomMap) -> Result<usize, HomError> {
    check_labels(g, m)?;
    let Target::Cycle(c) = m.target else {
        return Err(HomError::NeedsCycle);
    };
    if let Some((u, v)) = first_broken_edge(g, m) {
        return Err(HomError::NotHomomorphism(u, v));
    }
    Ok(c.k)
}

/// Lowest vertex with a non-zero label but no neighbour labelled `label + 1`.
fn first_loose(adj: &[Vec<usize>], labels: &[usize], k: usize) -> Option<usize> {
    (0..labels.len()).find(|&v| {
        labels[v] != 0 && !adj[v].iter().any(|&u| labels[u] == (labels[v] + 1) % k)
    })
}

/// Tightness: each vertex with non-zero label has a neighbour one step up the cycle.
pub fn is_tight(g: &MultiGraph, m: &HomMap) -> Result<bool, HomError> {
    let k = require_valid_cycle_map(g, m)?;
    let adj = g.simple_adjacency();
    Ok(first_loose(&adj, &m.labels, k).is_none())
}

/// One relabelling step of [`tighten`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TightenStep {
    pub vertex: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tightened {
    pub map: HomMap,
    pub steps: Vec<TightenStep>,
}

/// Turns a homomorphism into an odd cycle into a tight one.
///
/// Isolated vertices are first sent to 0. Then, while some vertex `v` has a
/// non-zero label and every neighbour sits at `label(v) - 1`, the lowest such
/// `v` moves down by two. Every intermediate map stays a homomorphism and a
/// vertex that reaches 0 is never moved again, so the loop ends after fewer
/// than `(k - 1) n` steps on `C_k`.
pub fn tighten(g: &MultiGraph, m: &HomMap) -> Result<Tightened, HomError> {
    let k = require_valid_cycle_map(g, m)?;
    if k % 2 == 0 {
        return Err(HomError::EvenCycle(k));
    }
    let adj = g.simple_adjacency();
    let mut labels = m.labels.clone();
    for v in 0..labels.len() {
        if adj[v].is_empty() {
            labels[v] = 0;
        }
    }
    let mut steps = Vec::new();
    while let Some(v) = first_loose(&adj, &labels, k) {
        let from = labels[v];
        let to = (from + k - 2) % k;
        labels[v] = to;
        steps.push(TightenStep { vertex: v, from, to });
        debug_assert!(steps.len() < (k - 1) * labels.len().max(1));
    }
    Ok(Tightened {
        map: HomMap::new(labels, m.target),
        steps,
    })
}

/// Exact number of homomorphisms (optionally only tight ones) into `C_k`.
///
/// This is plain enumeration of consistent partial maps, so the instance
/// must satisfy `k^n <= COUNT_BUDGET`.
pub fn count_homomorphisms(
    g: &MultiGraph,
    target: CycleTarget,
    tight_only: bool,
) -> Result<BigUint, HomError> {
    let k = target.k;
    let n = g.vertex_count();
    let count = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > COUNT_BUDGET {
        return Err(HomError::OverBudget {
            count,
            budget: COUNT_BUDGET,
        });
    }
    if g.has_loop() {
        return Ok(BigUint::default());
    }
    let adj = g.simple_adjacency();
    let t = Target::Cycle(target);
    let mut labels = vec![0; n];
    let mut total = 0u64;
    count_rec(&adj, &t, tight_only, 0, &mut labels, &mut total);
    Ok(BigUint::from(total))
}

fn count_rec(
    adj: &[Vec<usize>],
    t: &Target,
    tight_only: bool,
    v: usize,
    labels: &mut [usize],
    total: &mut u64,
) {
    if v == labels.len() {
        if !tight_only || first_loose(adj, labels, t.size()).is_none() {
            *total += 1;
        }
        return;
    }
    for l in 0..t.size() {
        if adj[v].iter().all(|&u| u >= v || t.adjacent(labels[u], l)) {
            labels[v] = l;
            count_rec(adj, t, tight_only, v + 1, labels, total);
        }
    }
}

/// Edges of each matching between consecutive classes of a map into `C_7`.
///
/// `result[j][i]` counts edges of matching `j` joining class `i - 1` to
/// class `i`. For a homomorphism all three rows coincide and equal
/// `n/2 - (n_{i+1} + n_{i+3} + n_{i+5})`.
pub fn matching_cut_counts(t: &MatchingTriple, m: &HomMap) -> Result<[[usize; 7]; 3], HomError> {
    let g = t.union();
    let k = require_valid_cycle_map(&g, m)?;
    if k != 7 {
        return Err(HomError::NeedsSevenCycle(k));
    }
    let mut out = [[0usize; 7]; 3];
    for (row, matching) in out.iter_mut().zip(t.matchings()) {
        for &(u, v) in matching.pairs() {
            let (a, b) = (m.labels[u], m.labels[v]);
            // upper end of the cycle edge {i-1, i}
            let i = if (a + 1) % 7 == b { b } else { a };
            row[i] += 1;
        }
    }
    Ok(out)
}

/// Order for backtracking: components in order of their lowest vertex,
/// each explored by BFS from its maximum-degree vertex with neighbours
/// taken by descending degree.
fn search_order(adj: &[Vec<usize>]) -> Vec<(usize, bool)> {
    let n = adj.len();
    let deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (std::cmp::Reverse(deg[v]), v));
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for &root in &by_degree {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        queue.push_back(root);
        let mut first = true;
        while let Some(u) = queue.pop_front() {
            order.push((u, first));
            first = false;
            let mut next: Vec<usize> = adj[u].iter().copied().filter(|&w| !seen[w]).collect();
            next.sort_by_key(|&w| (std::cmp::Reverse(deg[w]), w));
            for w in next {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    order
}

struct Search<'a> {
    adj: &'a [Vec<usize>],
    masks: Vec<u64>,
    order: Vec<(usize, bool)>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn support(&self, dom: u64) -> u64 {
        let mut s = 0;
        let mut rest = dom;
        while rest != 0 {
            s |= self.masks[rest.trailing_zeros() as usize];
            rest &= rest - 1;
        }
        s
    }

    /// AC-3 from the given vertices. Returns false on a wipe-out.
    fn propagate(&self, doms: &mut [u64], seeds: &[usize]) -> bool {
        let mut queue: VecDeque<usize> = seeds.iter().copied().collect();
        let mut queued = vec![false; doms.len()];
        for &s in seeds {
            queued[s] = true;
        }
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            let sup = self.support(doms[u]);
            for &w in &self.adj[u] {
                let narrowed = doms[w] & sup;
                if narrowed != doms[w] {
                    if narrowed == 0 {
                        return false;
                    }
                    doms[w] = narrowed;
                    if !queued[w] {
                        queued[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        true
    }

    fn solve(&mut self, depth: usize, doms: &mut Vec<u64>) -> Result<bool, HomError> {
        if depth == self.order.len() {
            return Ok(true);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(HomError::NodeBudgetExceeded(self.budget));
        }
        let (v, component_root) = self.order[depth];
        // targets are vertex-transitive, so a component root may be pinned to 0
        let candidates = if component_root { doms[v] & 1 } else { doms[v] };
        let mut rest = candidates;
        while rest != 0 {
            let l = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let mut next = doms.clone();
            next[v] = 1 << l;
            if self.propagate(&mut next, &[v]) && self.solve(depth + 1, &mut next)? {
                *doms = next;
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Finds a homomorphism with an explicit node budget.
pub fn find_homomorphism_with_budget(
    g: &MultiGraph,
    target: Target,
    budget: u64,
) -> Result<Option<HomMap>, HomError> {
    if g.has_loop() {
        return Ok(None);
    }
    let adj = g.simple_adjacency();
    let mut search = Search {
        adj: &adj,
        masks: target.adjacency_masks(),
        order: search_order(&adj),
        nodes: 0,
        budget,
    };
    let mut doms = vec![target.full_mask(); g.vertex_count()];
    if search.solve(0, &mut doms)? {
        let labels = doms.iter().map(|d| d.trailing_zeros() as usize).collect();
        Ok(Some(HomMap::new(labels, target)))
    } else {
        Ok(None)
    }
}

/// Finds some homomorphism `g -> target`, or `None`. Sources with a loop have none.
pub fn find_homomorphism(g: &MultiGraph, target: Target) -> Result<Option<HomMap>, HomError> {
    find_homomorphism_with_budget(g, target, DEFAULT_NODE_BUDGET)
}

/// Result of [`circular_chromatic_upper`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircularBound {
    pub value: Ratio<usize>,
    pub map: HomMap,
    pub candidates_tested: usize,
}

/// Greedy colouring in index order; an upper bound on the chromatic number.
fn greedy_colours(adj: &[Vec<usize>]) -> usize {
    let mut colour = vec![usize::MAX; adj.len()];
    let mut used = 0;
    for v in 0..adj.len() {
        let taken: Vec<usize> = adj[v].iter().map(|&u| colour[u]).collect();
        let c = (0..).find(|c| !taken.contains(c)).unwrap();
        colour[v] = c;
        used = used.max(c + 1);
    }
    used
}

/// Smallest `p/q` with `q <= q_max` such that `g` maps into `K_{p/q}`.
///
/// Candidates are reduced fractions between 2 and a greedy colouring bound,
/// tried in increasing order; since `K_{p/q} -> K_{p'/q'}` whenever
/// `p/q <= p'/q'`, the first success is the minimum over the candidate set.
/// This is an upper bound on the circular chromatic number.
pub fn circular_chromatic_upper(g: &MultiGraph, q_max: usize) -> Result<CircularBound, HomError> {
    if g.has_loop() {
        return Err(HomError::InvalidTarget("source graph has a loop".into()));
    }
    if q_max == 0 {
        return Err(HomError::InvalidTarget("q_max must be at least 1".into()));
    }
    let upper = greedy_colours(&g.simple_adjacency()).max(2);
    let mut fractions: Vec<Ratio<usize>> = Vec::new();
    for q in 1..=q_max {
        for p in 2 * q..=upper * q {
            let r = Ratio::new(p, q);
            if *r.denom() == q && p <= MAX_TARGET_SIZE {
                fractions.push(r);
            }
        }
    }
    fractions.sort();
    for (i, r) in fractions.iter().enumerate() {
        let target = Target::clique(*r.numer(), *r.denom())?;
        if let Some(map) = find_homomorphism(g, target)? {
            return Ok(CircularBound {
                value: *r,
                map,
                candidates_tested: i + 1,
            });
        }
    }
    Err(HomError::InvalidTarget(format!(
        "no candidate up to {} fits in {} target vertices",
        upper, MAX_TARGET_SIZE
    )))
}
