//! Multigraphs, perfect matchings and the edge-list text format.
//!
//! Every graph in this crate is a multigraph on vertices `0..n`. Parallel
//! edges are kept (the union of three matchings routinely has them) and loops
//! are representable so that file input can be parsed faithfully, even though
//! no homomorphism target accepts them.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Exact maximum independent set search is refused above this many vertices.
pub const MIS_VERTEX_LIMIT: usize = 40;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: vertex {vertex} out of range for {vertex_count} vertices")]
    VertexOutOfRange {
        line: usize,
        vertex: usize,
        vertex_count: usize,
    },
    #[error("header declares {declared} edges but {found} were given")]
    EdgeCountMismatch { declared: usize, found: usize },
    #[error("perfect matching needs an even, positive vertex count (got {0})")]
    OddVertexCount(usize),
    #[error("invalid perfect matching: {0}")]
    InvalidMatching(String),
    #[error("matchings disagree on vertex count ({0}, {1}, {2})")]
    TripleSizeMismatch(usize, usize, usize),
    #[error("exact independent set search is limited to {limit} vertices (got {vertex_count})")]
    TooLarge { vertex_count: usize, limit: usize },
}

/// Undirected multigraph. Edges are stored as `(min, max)` pairs in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl MultiGraph {
    pub fn empty(vertex_count: usize) -> Self {
        MultiGraph {
            vertex_count,
            edges: Vec::new(),
        }
    }

    /// Builds a graph from an edge list, rejecting out-of-range endpoints.
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = MultiGraph::empty(vertex_count);
        for (idx, (u, v)) in edges.into_iter().enumerate() {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        line: idx + 2,
                        vertex: w,
                        vertex_count,
                    });
                }
            }
            g.edges.push((u.min(v), u.max(v)));
        }
        Ok(g)
    }

    pub fn cycle(k: usize) -> Self {
        MultiGraph::from_edges(k, (0..k).map(|i| (i, (i + 1) % k))).expect("cycle edges in range")
    }

    pub fn path(n: usize) -> Self {
        MultiGraph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("path edges in range")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        MultiGraph::from_edges(n, edges).expect("complete edges in range")
    }

    /// The Petersen graph: outer 5-cycle `0..5`, spokes `i -- i+5`, inner pentagram.
    pub fn petersen() -> Self {
        let mut edges = Vec::with_capacity(15);
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        MultiGraph::from_edges(10, edges).expect("petersen edges in range")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_loop(&self) -> bool {
        self.edges.iter().any(|&(u, v)| u == v)
    }

    /// Degree counting multiplicity; a loop contributes two endpoints.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Adjacency lists with multiplicity (a parallel edge appears once per copy).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            if u != v {
                adj[v].push(u);
            }
        }
        adj
    }

    /// Adjacency lists with parallel edges collapsed, sorted ascending. Loops are kept.
    pub fn simple_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = self.adjacency();
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Edge multiset sorted lexicographically.
    pub fn sorted_edges(&self) -> Vec<(usize, usize)> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e
    }

    pub fn is_simple(&self) -> bool {
        if self.has_loop() {
            return false;
        }
        let e = self.sorted_edges();
        e.windows(2).all(|w| w[0] != w[1])
    }

    /// Length of a shortest cycle, `None` for forests.
    ///
    /// A loop is a 1-cycle and a pair of parallel edges a 2-cycle. Longer
    /// cycles are found by a BFS from every vertex over the simple graph.
    pub fn girth(&self) -> Option<usize> {
        if self.has_loop() {
            return Some(1);
        }
        let e = self.sorted_edges();
        if e.windows(2).any(|w| w[0] == w[1]) {
            return Some(2);
        }
        let adj = self.simple_adjacency();
        let n = self.vertex_count;
        let mut best: Option<usize> = None;
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for root in 0..n {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            parent.iter_mut().for_each(|p| *p = usize::MAX);
            dist[root] = 0;
            queue.clear();
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                if let Some(b) = best {
                    if 2 * dist[u] + 1 >= b {
                        break;
                    }
                }
                for &w in &adj[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        queue.push_back(w);
                    } else if parent[u] != w {
                        let len = dist[u] + dist[w] + 1;
                        if best.is_none_or(|b| len < b) {
                            best = Some(len);
                        }
                    }
                }
            }
        }
        best
    }

    /// Two-colouring test by BFS. Graphs with loops are never bipartite.
    pub fn is_bipartite(&self) -> bool {
        if self.has_loop() {
            return false;
        }
        let adj = self.simple_adjacency();
        let mut side = vec![u8::MAX; self.vertex_count];
        let mut queue = VecDeque::new();
        for s in 0..self.vertex_count {
            if side[s] != u8::MAX {
                continue;
            }
            side[s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &w in &adj[u] {
                    if side[w] == u8::MAX {
                        side[w] = 1 - side[u];
                        queue.push_back(w);
                    } else if side[w] == side[u] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Exact independence number by branch and bound.
    ///
    /// Vertices of degree 0 or 1 are always taken (some maximum set contains
    /// them); otherwise we branch on a maximum-degree vertex. The bound is
    /// `current + remaining` vertices. A vertex with a loop is never independent.
    pub fn max_independent_set_size(&self) -> Result<usize, GraphError> {
        let n = self.vertex_count;
        if n > MIS_VERTEX_LIMIT {
            return Err(GraphError::TooLarge {
                vertex_count: n,
                limit: MIS_VERTEX_LIMIT,
            });
        }
        let mut nbr = vec![0u64; n];
        let mut alive = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        for &(u, v) in &self.edges {
            if u == v {
                alive &= !(1u64 << u);
            } else {
                nbr[u] |= 1 << v;
                nbr[v] |= 1 << u;
            }
        }
        let mut best = 0;
        mis_branch(&nbr, alive, 0, &mut best);
        Ok(best)
    }
}

fn mis_branch(nbr: &[u64], mut alive: u64, mut taken: usize, best: &mut usize) {
    // degree <= 1 reductions
    loop {
        let mut reduced = false;
        let mut rest = alive;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if alive & (1 << v) == 0 {
                continue;
            }
            if (nbr[v] & alive).count_ones() <= 1 {
                taken += 1;
                alive &= !(nbr[v] | (1 << v));
                reduced = true;
            }
        }
        if !reduced {
            break;
        }
    }
    if alive == 0 {
        *best = (*best).max(taken);
        return;
    }
    if taken + alive.count_ones() as usize <= *best {
        return;
    }
    let mut pivot = 0;
    let mut pivot_deg = 0;
    let mut rest = alive;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let d = (nbr[v] & alive).count_ones();
        if d > pivot_deg {
            pivot = v;
            pivot_deg = d;
        }
    }
    mis_branch(nbr, alive & !(nbr[pivot] | (1 << pivot)), taken + 1, best);
    mis_branch(nbr, alive & !(1 << pivot), taken, best);
}

/// Parses the edge-list format: a header `n m`, then `m` lines `u v`.
///
/// Blank lines are skipped. Duplicate edge lines encode parallel edges.
pub fn parse_edge_list(text: &str) -> Result<MultiGraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (header_line, header) = lines.next().ok_or(GraphError::Malformed {
        line: 1,
        reason: "missing header".into(),
    })?;
    let (n, m) = parse_pair(header_line, header)?;
    let mut g = MultiGraph::empty(n);
    for (line, body) in lines {
        let (u, v) = parse_pair(line, body)?;
        for w in [u, v] {
            if w >= n {
                return Err(GraphError::VertexOutOfRange {
                    line,
                    vertex: w,
                    vertex_count: n,
                });
            }
        }
        g.edges.push((u.min(v), u.max(v)));
    }
    if g.edges.len() != m {
        return Err(GraphError::EdgeCountMismatch {
            declared: m,
            found: g.edges.len(),
        });
    }
    Ok(g)
}

fn parse_pair(line: usize, body: &str) -> Result<(usize, usize), GraphError> {
    let fields: Vec<&str> = body.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(GraphError::Malformed {
            line,
            reason: format!("expected two integers, found {:?}", body),
        });
    }
    let parse = |s: &str| {
        s.parse::<usize>().map_err(|_| GraphError::Malformed {
            line,
            reason: format!("{:?} is not a non-negative integer", s),
        })
    };
    Ok((parse(fields[0])?, parse(fields[1])?))
}

/// Writes the edge-list format with edges sorted lexicographically.
pub fn emit_edge_list(g: &MultiGraph) -> String {
    let mut out = format!("{} {}\n", g.vertex_count, g.edge_count());
    for (u, v) in g.sorted_edges() {
        out.push_str(&format!("{} {}\n", u, v));
    }
    out
}

impl FromStr for MultiGraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_edge_list(s)
    }
}

impl fmt::Display for MultiGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&emit_edge_list(self))
    }
}

/// A perfect matching stored as canonical pairs `(u, v)` with `u < v`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PerfectMatching {
    vertex_count: usize,
    pairs: Vec<(usize, usize)>,
}

impl PerfectMatching {
    pub fn new(vertex_count: usize, pairs: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        if vertex_count == 0 || vertex_count % 2 == 1 {
            return Err(GraphError::OddVertexCount(vertex_count));
        }
        if pairs.len() != vertex_count / 2 {
            return Err(GraphError::InvalidMatching(format!(
                "{} pairs for {} vertices",
                pairs.len(),
                vertex_count
            )));
        }
        let mut seen = vec![false; vertex_count];
        let mut canon = Vec::with_capacity(pairs.len());
        for (u, v) in pairs {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(GraphError::InvalidMatching(format!("vertex {} out of range", w)));
                }
                if seen[w] {
                    return Err(GraphError::InvalidMatching(format!("vertex {} covered twice", w)));
                }
                seen[w] = true;
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        Ok(PerfectMatching {
            vertex_count,
            pairs: canon,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// `partner[v]` is the vertex matched to `v`.
    pub fn partners(&self) -> Vec<usize> {
        let mut p = vec![0; self.vertex_count];
        for &(u, v) in &self.pairs {
            p[u] = v;
            p[v] = u;
        }
        p
    }

    /// All `(n-1)!!` perfect matchings of `0..n` in lexicographic order.
    pub fn enumerate(n: usize) -> Result<Vec<PerfectMatching>, GraphError> {
        if n == 0 || n % 2 == 1 {
            return Err(GraphError::OddVertexCount(n));
        }
        let mut out = Vec::new();
        let mut used = vec![false; n];
        let mut pairs = Vec::with_capacity(n / 2);
        enumerate_rec(n, &mut used, &mut pairs, &mut out);
        Ok(out)
    }

    /// Parses a line of space-separated `u-v` pairs.
    pub fn parse_line(vertex_count: usize, line: &str) -> Result<Self, GraphError> {
        let mut pairs = Vec::new();
        for tok in line.split_whitespace() {
            let (a, b) = tok
                .split_once('-')
                .ok_or_else(|| GraphError::InvalidMatching(format!("bad pair {:?}", tok)))?;
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| GraphError::InvalidMatching(format!("bad vertex {:?}", s)))
            };
            pairs.push((parse(a)?, parse(b)?));
        }
        PerfectMatching::new(vertex_count, pairs)
    }
}

impl fmt::Display for PerfectMatching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (u, v)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}-{}", u, v)?;
        }
        Ok(())
    }
}

fn enumerate_rec(
    n: usize,
    used: &mut [bool],
    pairs: &mut Vec<(usize, usize)>,
    out: &mut Vec<PerfectMatching>,
) {
    let Some(first) = used.iter().position(|&u| !u) else {
        out.push(PerfectMatching {
            vertex_count: n,
            pairs: pairs.clone(),
        });
        return;
    };
    used[first] = true;
    for other in first + 1..n {
        if !used[other] {
            used[other] = true;
            pairs.push((first, other));
            enumerate_rec(n, used, pairs, out);
            pairs.pop();
            used[other] = false;
        }
    }
    used[first] = false;
}

/// Three perfect matchings on a shared vertex set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatchingTriple {
    matchings: [PerfectMatching; 3],
}

impl MatchingTriple {
    pub fn new(
        m1: PerfectMatching,
        m2: PerfectMatching,
        m3: PerfectMatching,
    ) -> Result<Self, GraphError> {
        let (a, b, c) = (m1.vertex_count, m2.vertex_count, m3.vertex_count);
        if a != b || b != c {
            return Err(GraphError::TripleSizeMismatch(a, b, c));
        }
        Ok(MatchingTriple {
            matchings: [m1, m2, m3],
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.matchings[0].vertex_count
    }

    pub fn matchings(&self) -> &[PerfectMatching; 3] {
        &self.matchings
    }

    /// The cubic multigraph `M1 ∪ M2 ∪ M3`.
    pub fn union(&self) -> MultiGraph {
        MultiGraph {
            vertex_count: self.vertex_count(),
            edges: self
                .matchings
                .iter()
                .flat_map(|m| m.pairs.iter().copied())
                .collect(),
        }
    }

    /// Parses the three-line matching format.
    pub fn parse(vertex_count: usize, text: &str) -> Result<Self, GraphError> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if lines.len() != 3 {
            return Err(GraphError::InvalidMatching(format!(
                "expected 3 matching lines, found {}",
                lines.len()
            )));
        }
        MatchingTriple::new(
            PerfectMatching::parse_line(vertex_count, lines[0])?,
            PerfectMatching::parse_line(vertex_count, lines[1])?,
            PerfectMatching::parse_line(vertex_count, lines[2])?,
        )
    }
}

impl fmt::Display for MatchingTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.matchings {
            writeln!(f, "{}", m)?;
        }
        Ok(())
    }
}

/// Every ordered triple of perfect matchings on `n` vertices.
pub fn all_triples(n: usize) -> Result<Vec<MatchingTriple>, GraphError> {
    let ms = PerfectMatching::enumerate(n)?;
    let mut out = Vec::with_capacity(ms.len().pow(3));
    for a in &ms {
        for b in &ms {
            for c in &ms {
                out.push(MatchingTriple {
                    matchings: [a.clone(), b.clone(), c.clone()],
                });
            }
        }
    }
    Ok(out)
}

/// `union_of_matchings` as a free function.
pub fn union_of_matchings(t: &MatchingTriple) -> MultiGraph {
    t.union()
}
