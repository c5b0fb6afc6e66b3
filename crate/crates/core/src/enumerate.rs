//! Small-scale graph generators backing the property and acceptance suites:
//! exhaustive free-tree enumeration and seeded random instances.

use crate::graph::{Graph, GraphBuilder, NodeId, Orientation};
use std::collections::BTreeSet;

/// Canonical string for a free tree: AHU encoding rooted at the centroid
/// (minimum over both centroids when there are two).
pub fn tree_canonical(g: &Graph) -> String {
    assert!(g.is_tree());
    let n = g.n();
    if n == 1 {
        return "()".to_string();
    }
    // peel leaves to find the 1 or 2 centroids of the tree (by eccentricity)
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut layer: Vec<NodeId> = (0..n).filter(|&v| deg[v] == 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        let mut next = Vec::new();
        for &v in &layer {
            removed[v] = true;
            remaining -= 1;
            for (u, _, _) in g.neighbors(v) {
                if !removed[u] {
                    deg[u] -= 1;
                    if deg[u] == 1 {
                        next.push(u);
                    }
                }
            }
        }
        layer = next;
    }
    let centers: Vec<NodeId> = (0..n).filter(|&v| !removed[v]).collect();

    fn encode(g: &Graph, v: NodeId, parent: Option<NodeId>) -> String {
        let mut parts: Vec<String> = g
            .neighbors(v)
            .filter(|&(u, _, _)| Some(u) != parent)
            .map(|(u, _, _)| encode(g, u, Some(v)))
            .collect();
        parts.sort();
        format!("({})", parts.concat())
    }

    centers.iter().map(|&c| encode(g, c, None)).min().unwrap()
}

/// All non-isomorphic free trees on `n` nodes, built by extending the trees
/// on `n - 1` nodes with one leaf and deduplicating by canonical form.
pub fn free_trees(n: usize) -> Vec<Graph> {
    assert!(n >= 1);
    if n == 1 {
        return vec![Graph::path(1)];
    }
    let smaller = free_trees(n - 1);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in &smaller {
        for attach in 0..t.n() {
            let mut edges: Vec<(NodeId, NodeId)> =
                t.edges().iter().map(|e| (e.a, e.b)).collect();
            edges.push((attach, n - 1));
            let bigger = Graph::from_plain_edges(n, &edges);
            if seen.insert(tree_canonical(&bigger)) {
                out.push(bigger);
            }
        }
    }
    out
}

/// Deterministic xorshift generator so the suites stay seed-reproducible
/// without pulling a RNG crate into the library surface.
#[derive(Clone, Debug)]
pub struct SplitMix(u64);

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix(seed.wrapping_add(0x9e3779b97f4a7c15))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0);
        (self.next_u64() % bound as u64) as usize
    }
}

/// Random tree on `n` nodes with maximum degree at most `max_degree`.
pub fn random_tree(rng: &mut SplitMix, n: usize, max_degree: usize) -> Graph {
    assert!(n >= 1 && max_degree >= 2);
    let mut edges = Vec::new();
    let mut deg = vec![0usize; n];
    for v in 1..n {
        let mut u = rng.below(v);
        let mut guard = 0;
        while deg[u] + 1 > max_degree && guard < 4 * n {
            u = rng.below(v);
            guard += 1;
        }
        if deg[u] + 1 > max_degree {
            u = (0..v).find(|&w| deg[w] < max_degree).unwrap_or(0);
        }
        deg[u] += 1;
        deg[v] += 1;
        edges.push((u, v));
    }
    Graph::from_plain_edges(n, &edges)
}

/// Random simple graph with labels sampled from the supplied token pools.
/// Degrees are clamped to `max_degree`.
pub fn random_labeled_graph(
    rng: &mut SplitMix,
    n: usize,
    max_degree: usize,
    node_tokens: &[&str],
    edge_tokens: &[&str],
) -> Graph {
    let mut b = GraphBuilder::new(n);
    for v in 0..n {
        b.set_input(v, node_tokens[rng.below(node_tokens.len())]).unwrap();
    }
    let mut deg = vec![0usize; n];
    let attempts = 3 * n;
    let mut present = BTreeSet::new();
    for _ in 0..attempts {
        if n < 2 {
            break;
        }
        let u = rng.below(n);
        let v = rng.below(n);
        if u == v || deg[u] >= max_degree || deg[v] >= max_degree {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if !present.insert(key) {
            continue;
        }
        let orient = match rng.below(3) {
            0 => Orientation::Forward,
            1 => Orientation::Backward,
            _ => Orientation::None,
        };
        b.add_edge(u, v, edge_tokens[rng.below(edge_tokens.len())], orient).unwrap();
        deg[u] += 1;
        deg[v] += 1;
    }
    b.build().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_tree_counts_match_oeis() {
        // A000055: 1, 1, 1, 2, 3, 6, 11, 23, 47
        let expected = [1, 1, 1, 2, 3, 6, 11, 23, 47];
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(free_trees(i + 1).len(), e, "n = {}", i + 1);
        }
    }

    #[test]
    fn random_tree_respects_degree_bound() {
        let mut rng = SplitMix::new(7);
        for _ in 0..20 {
            let t = random_tree(&mut rng, 40, 3);
            assert!(t.is_tree());
            assert!((0..t.n()).all(|v| t.degree(v) <= 3));
        }
    }

    #[test]
    fn random_graphs_are_reproducible() {
        let ga = random_labeled_graph(&mut SplitMix::new(3), 20, 4, &["P", "M"], &["p", "g"]);
        let gb = random_labeled_graph(&mut SplitMix::new(3), 20, 4, &["P", "M"], &["p", "g"]);
        assert_eq!(ga.to_text(), gb.to_text());
    }
}
