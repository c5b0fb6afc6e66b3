//! Landscape classification of a minor-closed class given by its forbidden
//! minors.
//!
//! The level of a tree is the least j such that the tree embeds as a minor of
//! some level-j hard-instance tree. It is computed by a linear bottom-up
//! recursion: walking down from the root, one child may continue the spine at
//! the same level while every sibling subtree must fit one level lower. The
//! bucket then falls out of the minimum level across the forbidden list:
//! forests pin an exact path-like level, and otherwise planarity of some
//! forbidden minor separates bounded from unbounded treewidth.

use crate::graph::{Graph, RootedTree};
use crate::par;
use crate::planar::is_planar;
use thiserror::Error;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("input graph is not a tree")]
    NotATree,
    #[error("input graph is not a forest")]
    NotAForest,
}

/// Least j such that the rooted tree is a rooted minor of a level-j instance
/// tree of sufficient span.
///
/// Bottom-up closed form: a leaf has level 1; at an internal node with
/// maximum child level m attained t times and second maximum m2, the level is
/// m + 1 when t >= 2 and max(m, m2 + 1) otherwise.
pub fn rooted_level(t: &RootedTree) -> usize {
    let mut level = vec![0usize; t.n()];
    for v in t.post_order() {
        let kids = t.children(v);
        if kids.is_empty() {
            level[v] = 1;
            continue;
        }
        let mut m = 0usize;
        let mut count = 0usize;
        let mut m2 = 0usize;
        for &c in kids {
            let x = level[c];
            if x > m {
                m2 = m;
                m = x;
                count = 1;
            } else if x == m {
                count += 1;
                m2 = m;
            } else if x > m2 {
                m2 = x;
            }
        }
        level[v] = if count >= 2 { m + 1 } else { m.max(m2 + 1) };
    }
    level[t.root()]
}

/// Minimum of [`rooted_level`] over all root choices.
pub fn tree_min_level(g: &Graph) -> Result<usize, ClassifyError> {
    if !g.is_tree() {
        return Err(ClassifyError::NotATree);
    }
    let t0 = RootedTree::new(g.clone(), 0).unwrap();
    Ok((0..g.n())
        .map(|r| rooted_level(&t0.rerooted(r).unwrap()))
        .min()
        .expect("trees are non-empty"))
}

/// Component-wise maximum of [`tree_min_level`]. The empty graph embeds
/// vacuously at level 1. Disjoint forests embed at the maximum of their
/// component levels because instance trees of the same level concatenate:
/// a level-j tree of span s + s' contains disjoint level-j copies of spans
/// s and s'.
pub fn forest_min_level(g: &Graph) -> Result<usize, ClassifyError> {
    if !g.is_forest() {
        return Err(ClassifyError::NotAForest);
    }
    if g.n() == 0 {
        return Ok(1);
    }
    let mut best = 1;
    for comp in g.components() {
        let (sub, _) = g.induced(&comp);
        best = best.max(tree_min_level(&sub)?);
    }
    Ok(best)
}

/// Landscape bucket of a minor-closed class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bucket {
    /// Path-like at the given index: contains every instance tree up to this
    /// level and excludes one a level higher.
    A(usize),
    /// Bounded treewidth, unbounded pathwidth.
    B,
    /// Unbounded treewidth (but not all graphs).
    C,
    /// Empty forbidden list: the class of all graphs, outside the landscape.
    AllGraphs,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// The forbidden forest attaining the minimum level.
    Forest { index: usize, level: usize },
    /// A planar forbidden minor (bounded treewidth evidence).
    Planar { index: usize },
    None,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassVerdict {
    pub bucket: Bucket,
    pub witness: Witness,
}

impl ClassVerdict {
    /// Single-line machine-readable record, `bucket=... witness=...`.
    pub fn render(&self, name_of: impl Fn(usize) -> String) -> String {
        let bucket = match self.bucket {
            Bucket::A(i) => format!("A({i})"),
            Bucket::B => "B".to_string(),
            Bucket::C => "C".to_string(),
            Bucket::AllGraphs => "ALL".to_string(),
        };
        let witness = match &self.witness {
            Witness::Forest { index, level } => format!("{}:{}", name_of(*index), level),
            Witness::Planar { index } => format!("{}:planar", name_of(*index)),
            Witness::None => "-".to_string(),
        };
        format!("bucket={bucket} witness={witness}")
    }
}

/// Decide the landscape bucket of the class excluding the given minors.
///
/// If some forbidden minor is a forest, the minimum level j over the forest
/// minors puts the class at bucket A(j - 1). Otherwise the class contains all
/// forests, and a planar forbidden minor separates bounded treewidth (B) from
/// unbounded (C). An empty list means the class of all graphs.
pub fn classify(minors: &[Graph]) -> ClassVerdict {
    if minors.is_empty() {
        return ClassVerdict { bucket: Bucket::AllGraphs, witness: Witness::None };
    }
    let levels: Vec<Option<usize>> = par::map_slice(minors, |h| {
        if h.is_forest() {
            Some(forest_min_level(h).expect("checked forest"))
        } else {
            None
        }
    });
    let best = levels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.map(|lv| (lv, i)))
        .min();
    if let Some((level, index)) = best {
        debug_assert!(level >= 1);
        return ClassVerdict {
            bucket: Bucket::A(level - 1),
            witness: Witness::Forest { index, level },
        };
    }
    let planar_flags: Vec<bool> = par::map_slice(minors, is_planar);
    if let Some(index) = planar_flags.iter().position(|&p| p) {
        ClassVerdict { bucket: Bucket::B, witness: Witness::Planar { index } }
    } else {
        ClassVerdict { bucket: Bucket::C, witness: Witness::None }
    }
}

/// A star with `legs` legs of `len` nodes each; node 0 is the center.
pub fn spider(legs: usize, len: usize) -> Graph {
    let mut edges = Vec::new();
    for l in 0..legs {
        let base = 1 + l * len;
        edges.push((0, base));
        for i in 1..len {
            edges.push((base + i - 1, base + i));
        }
    }
    Graph::from_plain_edges(1 + legs * len, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{free_trees, random_tree, SplitMix};
    use crate::graph::{generate_t, RootedTree};
    use crate::minor::{
        brute_force_minor, brute_force_minor_with_limits, brute_force_rooted_minor,
        brute_force_rooted_minor_with_limits, DEFAULT_BUDGET,
    };

    #[test]
    fn single_node_has_level_one() {
        let t = RootedTree::new(Graph::path(1), 0).unwrap();
        assert_eq!(rooted_level(&t), 1);
    }

    #[test]
    fn claw_rooted_at_center_has_level_two() {
        let t = RootedTree::new(Graph::star(3), 0).unwrap();
        assert_eq!(rooted_level(&t), 2);
        // oracle: rooted minor of the level-2 span-3 tree but of no path
        let host = generate_t(2, 3).unwrap();
        assert!(brute_force_rooted_minor(&t, &host).unwrap());
        for s in 1..=5 {
            let path = generate_t(1, s).unwrap();
            assert!(!brute_force_rooted_minor(&t, &path).unwrap());
        }
    }

    #[test]
    fn generated_trees_attain_their_level() {
        for k in 1..=3 {
            let t = generate_t(k, 3).unwrap();
            assert_eq!(rooted_level(&t), k, "level of T({k},3)");
        }
        // oracle cross-checks at these sizes: identity embeddings hold, and
        // the level-2 tree does not embed in any path that could host it
        let t2 = generate_t(2, 3).unwrap();
        assert!(brute_force_rooted_minor(&t2, &t2).unwrap());
        let path = RootedTree::new(Graph::path(12), 0).unwrap();
        assert!(
            !brute_force_rooted_minor_with_limits(&t2, &path, 12, DEFAULT_BUDGET).unwrap()
        );
        let t3 = generate_t(3, 3).unwrap();
        assert!(
            brute_force_rooted_minor_with_limits(&t3, &t3, t3.n(), DEFAULT_BUDGET).unwrap()
        );
        let host26 = generate_t(2, 6).unwrap();
        assert!(
            !brute_force_minor_with_limits(t3.graph(), host26.graph(), host26.n(), DEFAULT_BUDGET)
                .unwrap(),
            "the level-3 tree must not embed in a level-2 host"
        );
    }

    #[test]
    fn path_has_level_one() {
        assert_eq!(tree_min_level(&Graph::path(4)).unwrap(), 1);
    }

    #[test]
    fn spider_of_three_long_legs_has_level_two() {
        let sp = spider(3, 2);
        assert_eq!(tree_min_level(&sp).unwrap(), 2);
        // brute force: embeds at level 2 span 4, not in any path
        let host = generate_t(2, 4).unwrap();
        assert!(
            brute_force_minor_with_limits(&sp, host.graph(), host.n(), DEFAULT_BUDGET).unwrap()
        );
        assert!(!brute_force_minor(&sp, &Graph::path(7)).unwrap());
    }

    #[test]
    fn t33_has_level_three() {
        let t = generate_t(3, 3).unwrap();
        assert_eq!(tree_min_level(t.graph()).unwrap(), 3);
    }

    #[test]
    fn non_trees_are_rejected() {
        assert_eq!(tree_min_level(&Graph::cycle(4)).unwrap_err(), ClassifyError::NotATree);
        assert_eq!(forest_min_level(&Graph::cycle(4)).unwrap_err(), ClassifyError::NotAForest);
    }

    #[test]
    fn forest_levels() {
        let two_edges = Graph::from_plain_edges(4, &[(0, 1), (2, 3)]);
        assert_eq!(forest_min_level(&two_edges).unwrap(), 1);
        // claw plus a path: component-wise maximum
        let mix = Graph::from_plain_edges(8, &[(0, 1), (0, 2), (0, 3), (4, 5), (5, 6), (6, 7)]);
        assert_eq!(forest_min_level(&mix).unwrap(), 2);
        assert_eq!(forest_min_level(&Graph::from_plain_edges(0, &[])).unwrap(), 1);
    }

    #[test]
    fn forest_component_embedding_justification() {
        // disjoint claw and path embed side by side in one level-2 tree of
        // larger span
        let mix = Graph::from_plain_edges(8, &[(0, 1), (0, 2), (0, 3), (4, 5), (5, 6), (6, 7)]);
        let host = generate_t(2, 5).unwrap();
        assert!(
            brute_force_minor_with_limits(&mix, host.graph(), host.n(), DEFAULT_BUDGET).unwrap()
        );
    }

    #[test]
    fn classify_golden_cases() {
        let p4 = Graph::path(4);
        let v = classify(std::slice::from_ref(&p4));
        assert_eq!(v.bucket, Bucket::A(0));
        assert_eq!(v.witness, Witness::Forest { index: 0, level: 1 });

        let claw = Graph::star(3);
        assert_eq!(classify(std::slice::from_ref(&claw)).bucket, Bucket::A(1));

        for k in 0..=3 {
            let t = generate_t(k + 1, 3).unwrap();
            assert_eq!(
                classify(std::slice::from_ref(t.graph())).bucket,
                Bucket::A(k),
                "excluding the level-{} tree",
                k + 1
            );
        }

        let k4 = Graph::complete(4);
        let v = classify(std::slice::from_ref(&k4));
        assert_eq!(v.bucket, Bucket::B);
        assert_eq!(v.witness, Witness::Planar { index: 0 });

        let v = classify(&[Graph::complete(5), Graph::complete_bipartite(3, 3)]);
        assert_eq!(v.bucket, Bucket::C);

        assert_eq!(classify(&[]).bucket, Bucket::AllGraphs);
    }

    #[test]
    fn classify_is_invariant_under_reorder_and_duplication() {
        let list = vec![Graph::complete(4), Graph::star(3), Graph::path(4)];
        let base = classify(&list).bucket;
        let reordered = vec![list[2].clone(), list[0].clone(), list[1].clone()];
        assert_eq!(classify(&reordered).bucket, base);
        let duplicated =
            vec![list[1].clone(), list[1].clone(), list[0].clone(), list[2].clone(), list[2].clone()];
        assert_eq!(classify(&duplicated).bucket, base);
    }

    #[test]
    fn buckets_are_exhaustive_and_exclusive() {
        let inputs: Vec<Vec<Graph>> = vec![
            vec![],
            vec![Graph::path(2)],
            vec![Graph::star(3)],
            vec![Graph::complete(4)],
            vec![Graph::complete(5)],
            vec![Graph::complete(5), Graph::path(3)],
            vec![Graph::cycle(4), Graph::complete_bipartite(3, 3)],
        ];
        for list in &inputs {
            let v = classify(list);
            let count = [
                matches!(v.bucket, Bucket::A(_)),
                v.bucket == Bucket::B,
                v.bucket == Bucket::C,
                v.bucket == Bucket::AllGraphs,
            ]
            .iter()
            .filter(|&&b| b)
            .count();
            assert_eq!(count, 1);
        }
    }

    #[test]
    fn render_formats() {
        let v = classify(&[Graph::path(4)]);
        assert_eq!(v.render(|i| format!("H{}", i + 1)), "bucket=A(0) witness=H1:1");
        let v = classify(&[Graph::complete(5), Graph::complete_bipartite(3, 3)]);
        assert_eq!(v.render(|i| format!("H{}", i + 1)), "bucket=C witness=-");
    }

    #[test]
    fn level_agrees_with_minor_oracle_on_small_trees() {
        // exhaustive dual-route check on all trees with at most 6 nodes
        for n in 1..=6 {
            for t in free_trees(n) {
                let fast = tree_min_level(&t).unwrap();
                let mut oracle = None;
                for j in 1..=3 {
                    let host = generate_t(j, n.max(1)).unwrap();
                    if brute_force_minor_with_limits(&t, host.graph(), host.n(), DEFAULT_BUDGET)
                        .unwrap()
                    {
                        oracle = Some(j);
                        break;
                    }
                }
                assert_eq!(Some(fast), oracle, "tree on {n} nodes");
            }
        }
    }

    #[test]
    fn rooted_level_is_monotone_under_rooted_minors() {
        let mut rng = SplitMix::new(11);
        for _ in 0..40 {
            let g = random_tree(&mut rng, 8, 4);
            let t = RootedTree::new(g, 0).unwrap();
            // random rooted minor: delete a leaf or contract an edge into the
            // parent, a few times
            let mut edges: Vec<(usize, usize)> = Vec::new();
            for v in 0..t.n() {
                for &c in t.children(v) {
                    edges.push((v, c));
                }
            }
            let mut merged: Vec<usize> = (0..t.n()).collect();
            fn find(m: &mut Vec<usize>, v: usize) -> usize {
                if m[v] != v {
                    let r = find(m, m[v]);
                    m[v] = r;
                    r
                } else {
                    v
                }
            }
            let ops = rng.below(4);
            for _ in 0..ops {
                if edges.is_empty() {
                    break;
                }
                let i = rng.below(edges.len());
                let (p, c) = edges.remove(i);
                // contract child into parent
                let rp = find(&mut merged, p);
                let rc = find(&mut merged, c);
                merged[rc] = rp;
            }
            // rebuild the contracted tree
            let mut repr: Vec<usize> = Vec::new();
            let mut idx = vec![usize::MAX; t.n()];
            for v in 0..t.n() {
                let r = find(&mut merged, v);
                if idx[r] == usize::MAX {
                    idx[r] = repr.len();
                    repr.push(r);
                }
            }
            let mut contracted: Vec<(usize, usize)> = Vec::new();
            for v in 0..t.n() {
                if let Some(p) = t.parent(v) {
                    let (a, b) = (find(&mut merged, p), find(&mut merged, v));
                    if a != b {
                        contracted.push((idx[a].min(idx[b]), idx[a].max(idx[b])));
                    }
                }
            }
            contracted.sort_unstable();
            contracted.dedup();
            let h = Graph::from_plain_edges(repr.len(), &contracted);
            if !h.is_tree() {
                continue;
            }
            let hroot = idx[find(&mut merged, 0)];
            let ht = RootedTree::new(h, hroot).unwrap();
            assert!(
                brute_force_rooted_minor(&ht, &t).unwrap(),
                "construction must yield a rooted minor"
            );
            assert!(rooted_level(&ht) <= rooted_level(&t));
        }
    }
}
