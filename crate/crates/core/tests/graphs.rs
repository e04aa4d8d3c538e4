use homlab::graph::{emit_edge_list, parse_edge_list, MultiGraph};
use proptest::prelude::*;

fn multigraph() -> impl Strategy<Value = MultiGraph> {
    (1usize..12).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..25)
            .prop_map(move |es| MultiGraph::from_edges(n, es.into_iter().filter(|(u, v)| u != v)).unwrap())
    })
}

/// Largest independent set by trying every subset.
fn mis_oracle(g: &MultiGraph) -> usize {
    let n = g.vertex_count();
    (0u32..1 << n)
        .filter(|&s| g.edges().iter().all(|&(u, v)| s >> u & 1 == 0 || s >> v & 1 == 0))
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap()
}

/// Shortest cycle: parallel edges give 2, otherwise BFS from every vertex.
fn girth_oracle(g: &MultiGraph) -> Option<usize> {
    let mut sorted = g.edges().to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Some(2);
    }
    let n = g.vertex_count();
    let mut best = None;
    for (skip, &(s, t)) in sorted.iter().enumerate() {
        // shortest s-t path avoiding this edge closes a cycle through it
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for (j, &(a, b)) in sorted.iter().enumerate() {
                if j == skip {
                    continue;
                }
                let y = if a == x { b } else if b == x { a } else { continue };
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        if dist[t] != usize::MAX {
            let len = dist[t] + 1;
            best = Some(best.map_or(len, |b: usize| b.min(len)));
        }
    }
    best
}

proptest! {
    #[test]
    fn edge_list_round_trip(g in multigraph()) {
        let text = emit_edge_list(&g);
        let back = parse_edge_list(&text).unwrap();
        prop_assert_eq!(emit_edge_list(&back), text);
        prop_assert_eq!(back.sorted_edges(), g.sorted_edges());
    }

    #[test]
    fn independence_number_matches_subsets(g in multigraph()) {
        prop_assert_eq!(g.max_independent_set_size().unwrap(), mis_oracle(&g));
    }

    #[test]
    fn girth_matches_bfs(g in multigraph()) {
        prop_assert_eq!(g.girth(), girth_oracle(&g));
    }
}

#[test]
fn named_graphs() {
    let p = MultiGraph::petersen();
    assert_eq!(p.girth(), Some(5));
    assert_eq!(p.max_independent_set_size().unwrap(), 4);
    assert!(p.degrees().iter().all(|&d| d == 3));
    assert_eq!(MultiGraph::cycle(7).max_independent_set_size().unwrap(), 3);
    assert!(MultiGraph::cycle(8).is_bipartite());
    assert!(!MultiGraph::cycle(9).is_bipartite());
}

#[test]
fn malformed_edge_lists_rejected() {
    assert!(parse_edge_list("").is_err());
    assert!(parse_edge_list("3 1\n0 5\n").is_err());
    assert!(parse_edge_list("3 2\n0 1\n").is_err());
    assert!(parse_edge_list("3 1\n0 x\n").is_err());
}
