//! Path decompositions of the hard-instance trees, layer decompositions with
//! their growth bounds, and small-scale exact pathwidth.

use crate::graph::{
    generate_t_with_skeleton, Graph, InvalidParameter, NodeId, RootedTree, TreeSkeleton,
};
use thiserror::Error;

/// An ordered sequence of bags. Valid decompositions satisfy: bags cover all
/// nodes, the bags containing any fixed node form a contiguous interval, and
/// every edge appears inside some bag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathDecomposition {
    pub bags: Vec<Vec<NodeId>>,
}

impl PathDecomposition {
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(1) - 1
    }

    /// One bag per line, nodes space-separated.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for bag in &self.bags {
            let toks: Vec<String> = bag.iter().map(ToString::to_string).collect();
            s.push_str(&toks.join(" "));
            s.push('\n');
        }
        s
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum DecompositionError {
    #[error("bag {bag} references node {node} outside the graph")]
    ForeignNode { bag: usize, node: NodeId },
}

/// Checks the three path-decomposition conditions. A bag referencing a node
/// outside the graph is an error rather than a plain `false`.
pub fn validate_path_decomposition(
    g: &Graph,
    pd: &PathDecomposition,
) -> Result<bool, DecompositionError> {
    for (i, bag) in pd.bags.iter().enumerate() {
        if let Some(&node) = bag.iter().find(|&&v| v >= g.n()) {
            return Err(DecompositionError::ForeignNode { bag: i, node });
        }
    }
    // coverage
    let mut covered = vec![false; g.n()];
    for bag in &pd.bags {
        for &v in bag {
            covered[v] = true;
        }
    }
    if !covered.iter().all(|&c| c) {
        return Ok(false);
    }
    // contiguity
    for v in 0..g.n() {
        let idx: Vec<usize> = pd
            .bags
            .iter()
            .enumerate()
            .filter(|(_, bag)| bag.contains(&v))
            .map(|(i, _)| i)
            .collect();
        if let (Some(&first), Some(&last)) = (idx.first(), idx.last()) {
            if last - first + 1 != idx.len() {
                return Ok(false);
            }
        }
    }
    // every edge in some bag
    for e in g.edges() {
        if !pd.bags.iter().any(|bag| bag.contains(&e.a) && bag.contains(&e.b)) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn decompose_skeleton(skel: &TreeSkeleton) -> Vec<Vec<NodeId>> {
    let s = skel.spine.len();
    if skel.subtrees.is_empty() {
        if s == 1 {
            return vec![vec![skel.spine[0]]];
        }
        return (0..s - 1).map(|i| vec![skel.spine[i], skel.spine[i + 1]]).collect();
    }
    let mut bags = Vec::new();
    for j in 0..s {
        for mut bag in decompose_skeleton(&skel.subtrees[j]) {
            bag.push(skel.spine[j]);
            bags.push(bag);
        }
        if j + 1 < s {
            bags.push(vec![skel.spine[j], skel.spine[j + 1]]);
        }
    }
    bags
}

/// The constructive width-k decomposition of the level-k span-s tree: base
/// bags pair consecutive spine nodes; the inductive step adds the carrying
/// spine node to every sub-decomposition bag and interleaves two-node
/// separator bags.
pub fn path_decomposition_of_t(k: usize, s: usize) -> Result<PathDecomposition, InvalidParameter> {
    let (_, skel) = generate_t_with_skeleton(k, s)?;
    Ok(PathDecomposition { bags: decompose_skeleton(&skel) })
}

/// Exact pathwidth by dynamic programming over vertex subsets (pathwidth
/// equals the vertex separation number). Exhaustive; hosts are capped at 20
/// nodes.
pub fn exact_pathwidth(g: &Graph) -> usize {
    let n = g.n();
    assert!(n <= 20, "exact pathwidth is exhaustive; {n} nodes is too many");
    if n == 0 {
        return 0;
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut memo = vec![u8::MAX; 1usize << n];
    memo[0] = 0;
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).fold(0u32, |acc, (u, _, _)| acc | (1 << u)))
        .collect();
    let boundary = |set: u32| -> u8 {
        let mut b = 0u8;
        for v in 0..n {
            if set & (1 << v) != 0 && nbr[v] & !set != 0 {
                b += 1;
            }
        }
        b
    };
    for set in 1u32..=full {
        let b = boundary(set);
        let mut best = u8::MAX;
        for v in 0..n {
            if set & (1 << v) != 0 {
                let prev = memo[(set & !(1 << v)) as usize];
                best = best.min(prev.max(b));
            }
        }
        memo[set as usize] = best;
    }
    memo[full as usize] as usize
}

/// The nested layer structure of a rooted tree at threshold `c`.
///
/// `l(i)` is the set of nodes whose subtree holds at least `c` nodes of
/// `l_star(i - 1)`, and `l_star(i)` the nodes with at least two children in
/// `l(i)`; `l_star(0)` is the whole node set. `limit_level` is the least k
/// whose layer k+1 is empty.
#[derive(Clone, Debug)]
pub struct LayerDecomposition {
    pub c: usize,
    l: Vec<Vec<NodeId>>,
    l_star: Vec<Vec<NodeId>>,
    pub limit_level: usize,
}

impl LayerDecomposition {
    /// `L_i` for `i >= 1`; empty past the computed depth.
    pub fn l(&self, i: usize) -> &[NodeId] {
        assert!(i >= 1);
        self.l.get(i - 1).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `L_i^*` for `i >= 0`; `l_star(0)` is all nodes.
    pub fn l_star(&self, i: usize) -> &[NodeId] {
        self.l_star.get(i).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Bottom-up layer computation, one pass per level.
pub fn layer_decomposition(t: &RootedTree, c: usize) -> LayerDecomposition {
    assert!(c >= 1);
    let n = t.n();
    let post = t.post_order();
    let mut prev_star: Vec<bool> = vec![true; n];
    let mut l_star: Vec<Vec<NodeId>> = vec![(0..n).collect()];
    let mut l: Vec<Vec<NodeId>> = Vec::new();
    loop {
        // subtree counts of prev_star members
        let mut count = vec![0usize; n];
        for &v in &post {
            count[v] = usize::from(prev_star[v])
                + t.children(v).iter().map(|&u| count[u]).sum::<usize>();
        }
        let li: Vec<NodeId> = (0..n).filter(|&v| count[v] >= c).collect();
        if li.is_empty() {
            break;
        }
        let in_li: Vec<bool> = {
            let mut m = vec![false; n];
            for &v in &li {
                m[v] = true;
            }
            m
        };
        let lsi: Vec<NodeId> = (0..n)
            .filter(|&v| t.children(v).iter().filter(|&&u| in_li[u]).count() >= 2)
            .collect();
        prev_star = {
            let mut m = vec![false; n];
            for &v in &lsi {
                m[v] = true;
            }
            m
        };
        l.push(li);
        l_star.push(lsi);
    }
    let limit_level = l.len();
    LayerDecomposition { c, l, l_star, limit_level }
}

/// True iff the layer structure at threshold `c` dies out by level `k`.
pub fn is_k_c_limited(t: &RootedTree, k: usize, c: usize) -> bool {
    layer_decomposition(t, c).limit_level <= k
}

/// The constructive neighborhood-size constant: `c - 1` at level 0 and
/// `delta * c * (delta * K(k-1) + 1)` above.
pub fn k_bound(c: usize, k: usize, delta: usize) -> u64 {
    assert!(c >= 1 && delta >= 1);
    if k == 0 {
        (c - 1) as u64
    } else {
        (delta as u64) * (c as u64) * ((delta as u64) * k_bound(c, k - 1, delta) + 1)
    }
}

/// Measured neighborhood growth from a root, with the least exponent whose
/// constructive bound covers every measured radius.
#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub root: NodeId,
    /// `counts[d]` is the number of nodes within distance d of the root.
    pub counts: Vec<usize>,
    /// Maximum degree observed in the graph.
    pub delta: usize,
    /// The radius-1 measurement used as the layer threshold.
    pub c: usize,
    /// Least k <= 3 such that the rooted tree (or BFS tree) is (k, c)-limited
    /// and counts stay within `k_bound(c, k, delta) * d^k`; None if no such k.
    pub fitted_exponent: Option<usize>,
}

impl GrowthReport {
    /// CSV rows `d,count,bound`; the bound column is empty when no exponent
    /// fitted.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("d,count,bound\n");
        for (d, &count) in self.counts.iter().enumerate() {
            let bound = match self.fitted_exponent {
                Some(k) if d >= 1 => {
                    (k_bound(self.c, k, self.delta) as u128 * (d as u128).pow(k as u32))
                        .to_string()
                }
                _ => String::new(),
            };
            s.push_str(&format!("{d},{count},{bound}\n"));
        }
        s
    }
}

fn bfs_tree(g: &Graph, root: NodeId) -> RootedTree {
    let mut parent = vec![usize::MAX; g.n()];
    let mut order = vec![root];
    parent[root] = root;
    let mut q = std::collections::VecDeque::from([root]);
    while let Some(v) = q.pop_front() {
        for (u, _, _) in g.neighbors(v) {
            if parent[u] == usize::MAX {
                parent[u] = v;
                order.push(u);
                q.push_back(u);
            }
        }
    }
    // restrict to the reachable component, re-indexed
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in order.iter().enumerate() {
        local[v] = i;
    }
    let edges: Vec<(NodeId, NodeId)> = order
        .iter()
        .skip(1)
        .map(|&v| (local[parent[v]], local[v]))
        .collect();
    RootedTree::new(Graph::from_plain_edges(order.len(), &edges), 0).unwrap()
}

const FIT_EXPONENT_MAX: usize = 3;

/// BFS counts around `root` for d = 0..=d_max plus the fitted exponent.
pub fn growth_profile(g: &Graph, root: NodeId, d_max: usize) -> GrowthReport {
    assert!(root < g.n(), "unknown root node");
    let dist = g.bfs_dist(root);
    let counts: Vec<usize> = (0..=d_max)
        .map(|d| dist.iter().filter(|x| x.map_or(false, |v| v <= d)).count())
        .collect();
    let delta = (0..g.n()).map(|v| g.degree(v)).max().unwrap_or(0).max(1);
    let c = counts.get(1).copied().unwrap_or(1).max(1);
    let tree = bfs_tree(g, root);
    let fitted_exponent = (0..=FIT_EXPONENT_MAX).find(|&k| {
        is_k_c_limited(&tree, k, c)
            && (1..=d_max).all(|d| {
                (counts[d] as u128) <= k_bound(c, k, delta) as u128 * (d as u128).pow(k as u32)
            })
    });
    GrowthReport { root, counts, delta, c, fitted_exponent }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_t;

    #[test]
    fn base_decomposition_of_path() {
        let pd = path_decomposition_of_t(1, 5).unwrap();
        assert_eq!(pd.bags.len(), 4);
        assert_eq!(pd.width(), 1);
        let t = generate_t(1, 5).unwrap();
        assert!(validate_path_decomposition(t.graph(), &pd).unwrap());
    }

    #[test]
    fn decomposition_of_t23_has_width_two() {
        let pd = path_decomposition_of_t(2, 3).unwrap();
        assert_eq!(pd.width(), 2);
        let t = generate_t(2, 3).unwrap();
        assert_eq!(t.n(), 12);
        assert!(validate_path_decomposition(t.graph(), &pd).unwrap());
    }

    #[test]
    fn decomposition_of_t33_validates_and_is_optimal() {
        let pd = path_decomposition_of_t(3, 3).unwrap();
        assert_eq!(pd.width(), 3);
        let t = generate_t(3, 3).unwrap();
        assert!(validate_path_decomposition(t.graph(), &pd).unwrap());
        // no width-1 decomposition of T(2,3) exists
        let t2 = generate_t(2, 3).unwrap();
        assert_eq!(exact_pathwidth(t2.graph()), 2);
    }

    #[test]
    fn validator_rejects_uncovered_edge() {
        let tri = Graph::cycle(3);
        let pd = PathDecomposition { bags: vec![vec![0, 1], vec![1, 2]] };
        assert!(!validate_path_decomposition(&tri, &pd).unwrap());
    }

    #[test]
    fn validator_rejects_foreign_node() {
        let g = Graph::path(3);
        let pd = PathDecomposition { bags: vec![vec![0, 7]] };
        assert_eq!(
            validate_path_decomposition(&g, &pd).unwrap_err(),
            DecompositionError::ForeignNode { bag: 0, node: 7 }
        );
    }

    #[test]
    fn validator_rejects_non_contiguous_occurrences() {
        let g = Graph::path(3);
        let pd = PathDecomposition { bags: vec![vec![0, 1], vec![1, 2], vec![0, 2]] };
        assert!(!validate_path_decomposition(&g, &pd).unwrap());
    }

    #[test]
    fn exact_pathwidth_small_cases() {
        assert_eq!(exact_pathwidth(&Graph::path(3)), 1);
        assert_eq!(exact_pathwidth(&Graph::complete(3)), 2);
        assert_eq!(exact_pathwidth(&Graph::star(3)), 1);
        assert_eq!(exact_pathwidth(&Graph::complete(5)), 4);
    }

    #[test]
    fn layers_of_single_node() {
        let t = RootedTree::new(Graph::path(1), 0).unwrap();
        let ld = layer_decomposition(&t, 2);
        assert!(ld.l(1).is_empty());
        assert_eq!(ld.limit_level, 0);
    }

    #[test]
    fn layers_of_path_t1_10() {
        let t = generate_t(1, 10).unwrap();
        let ld = layer_decomposition(&t, 3);
        // the first 8 spine nodes carry subtrees of size >= 3
        assert_eq!(ld.l(1).len(), 8);
        assert!(ld.l_star(1).is_empty());
        assert!(ld.l(2).is_empty());
        assert_eq!(ld.limit_level, 1);
    }

    #[test]
    fn layers_of_t25_with_threshold_two() {
        let t = generate_t(2, 5).unwrap();
        let ld = layer_decomposition(&t, 2);
        assert_eq!(ld.limit_level, 2);
        assert!(is_k_c_limited(&t, 2, 2));
        assert!(!is_k_c_limited(&t, 1, 2));
    }

    #[test]
    fn small_trees_are_zero_limited() {
        let t = RootedTree::new(Graph::path(1), 0).unwrap();
        assert!(is_k_c_limited(&t, 0, 2));
    }

    fn complete_binary_tree(depth: usize) -> RootedTree {
        let n = (1usize << (depth + 1)) - 1;
        let edges: Vec<(NodeId, NodeId)> = (1..n).map(|v| ((v - 1) / 2, v)).collect();
        RootedTree::new(Graph::from_plain_edges(n, &edges), 0).unwrap()
    }

    #[test]
    fn complete_binary_tree_is_not_one_limited() {
        let t = complete_binary_tree(6);
        assert!(!is_k_c_limited(&t, 1, 2));
    }

    #[test]
    fn k_bound_examples() {
        assert_eq!(k_bound(3, 0, 3), 2);
        assert_eq!(k_bound(3, 1, 3), 63);
        assert_eq!(k_bound(1, 0, 3), 0);
    }

    #[test]
    fn growth_of_path_is_linear() {
        let g = Graph::path(10);
        let r = growth_profile(&g, 0, 5);
        assert_eq!(r.counts, vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(r.fitted_exponent, Some(1));
    }

    #[test]
    fn growth_of_t28_is_quadratic() {
        let t = generate_t(2, 8).unwrap();
        let r = growth_profile(t.graph(), t.root(), 6);
        assert_eq!(r.fitted_exponent, Some(2));
    }

    #[test]
    fn growth_of_complete_binary_tree_fits_no_small_exponent() {
        let t = complete_binary_tree(8);
        let r = growth_profile(t.graph(), t.root(), 6);
        for (d, &c) in r.counts.iter().enumerate() {
            assert_eq!(c, (1usize << (d + 1)) - 1);
        }
        assert_eq!(r.fitted_exponent, None);
    }

    #[test]
    fn decomposition_prints_one_bag_per_line() {
        let pd = path_decomposition_of_t(1, 3).unwrap();
        assert_eq!(pd.to_text(), "0 1\n1 2\n");
    }
}
