//! Exhaustive minor containment oracles.
//!
//! These decide minor containment by searching over partitions of the host
//! into connected clusters (plus deletions), which is the ground-truth
//! definition. They are meant for desk-scale inputs: the public entry points
//! refuse hosts above [`DEFAULT_NODE_CAP`] nodes, and the `with_limits`
//! variants take an explicit cap plus a search budget so tests can push
//! further without risking an unbounded run. Host state is kept in 128-bit
//! masks, which also bounds every search to 128 host nodes.

use crate::graph::{Graph, NodeId, RootedTree};
use thiserror::Error;

/// Hosts above this size are refused by the capped entry points.
pub const DEFAULT_NODE_CAP: usize = 12;

/// Default bound on search steps before giving up with an error.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

/// Hard representation limit of the search state.
pub const ABSOLUTE_NODE_CAP: usize = 128;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle refuses hosts larger than {cap} nodes (host has {got})")]
    TooLarge { cap: usize, got: usize },
    #[error("oracle search budget exhausted")]
    BudgetExhausted,
}

struct Search {
    /// placement order of pattern nodes
    order: Vec<usize>,
    /// for each order position, the earlier-placed pattern neighbors
    anchors: Vec<Vec<usize>>,
    /// host adjacency masks
    adj: Vec<u128>,
    /// mask of host nodes per placed pattern node (indexed by pattern id)
    cluster: Vec<u128>,
    free: u128,
    /// minimum number of free host nodes to keep (iterative deepening on the
    /// total model size)
    min_free: usize,
    steps: u64,
    budget: u64,
}

fn iter_bits(mut mask: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let b = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(b)
        }
    })
}

impl Search {
    fn new(h: &Graph, g: &Graph, pattern_order: Vec<usize>) -> Self {
        let mut placed_at = vec![usize::MAX; h.n()];
        for (i, &p) in pattern_order.iter().enumerate() {
            placed_at[p] = i;
        }
        let anchors = pattern_order
            .iter()
            .map(|&p| {
                let mut a: Vec<usize> = h
                    .neighbors(p)
                    .map(|(q, _, _)| q)
                    .filter(|&q| placed_at[q] < placed_at[p])
                    .collect();
                a.sort_by_key(|&q| placed_at[q]);
                a
            })
            .collect();
        let adj: Vec<u128> = (0..g.n())
            .map(|v| g.neighbors(v).fold(0u128, |m, (u, _, _)| m | (1 << u)))
            .collect();
        let free = if g.n() == 128 { u128::MAX } else { (1u128 << g.n()) - 1 };
        Search {
            order: pattern_order,
            anchors,
            adj,
            cluster: vec![0; h.n()],
            free,
            min_free: 0,
            steps: 0,
            budget: DEFAULT_BUDGET,
        }
    }

    fn nbr_mask(&self, set: u128) -> u128 {
        iter_bits(set).fold(0u128, |m, v| m | self.adj[v])
    }

    fn place(&mut self, i: usize, forced_seed: Option<NodeId>) -> Result<bool, OracleError> {
        if i == self.order.len() {
            return Ok(true);
        }
        if (self.free.count_ones() as usize) < (self.order.len() - i) + self.min_free {
            return Ok(false);
        }
        let p = self.order[i];
        let seeds: u128 = if let Some(s) = forced_seed.filter(|_| i == 0) {
            1u128 << s
        } else if self.anchors[i].is_empty() {
            self.free
        } else {
            self.nbr_mask(self.cluster[self.anchors[i][0]]) & self.free
        };
        let dedupe = self.anchors[i].is_empty() && forced_seed.is_none();
        for seed in iter_bits(seeds) {
            let bit = 1u128 << seed;
            if self.free & bit == 0 {
                continue;
            }
            self.cluster[p] = bit;
            self.free &= !bit;
            // anchorless clusters are enumerated once, as sets whose minimum
            // element is the seed
            let banned = if dedupe { bit - 1 } else { 0 };
            let found = self.grow(i, banned)?;
            self.cluster[p] = 0;
            self.free |= bit;
            if found {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn grow(&mut self, i: usize, banned: u128) -> Result<bool, OracleError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(OracleError::BudgetExhausted);
        }
        let p = self.order[i];
        let nbr = self.nbr_mask(self.cluster[p]);
        let satisfied =
            self.anchors[i].iter().all(|&a| nbr & self.cluster[a] != 0);
        if satisfied && self.place(i + 1, None)? {
            return Ok(true);
        }
        // an extension costs one node on top of the unplaced pattern nodes
        // and the deepening bound on the model size
        if (self.free.count_ones() as usize) < (self.order.len() - i) + self.min_free {
            return Ok(false);
        }
        let mut local_banned = banned;
        for x in iter_bits(nbr & self.free & !local_banned) {
            let bit = 1u128 << x;
            if self.free & bit == 0 || local_banned & bit != 0 {
                continue;
            }
            self.cluster[p] |= bit;
            self.free &= !bit;
            let r = self.grow(i, local_banned);
            self.cluster[p] &= !bit;
            self.free |= bit;
            if r? {
                return Ok(true);
            }
            local_banned |= bit;
        }
        Ok(false)
    }
}

/// Placement order: component by component, DFS inside each so every pattern
/// node after the first of its component has an already-placed neighbor and
/// whole branches complete before the search moves on.
fn pattern_order(h: &Graph, first: Option<usize>) -> Vec<usize> {
    let mut order = Vec::with_capacity(h.n());
    let mut seen = vec![false; h.n()];
    let mut roots: Vec<usize> = (0..h.n()).collect();
    if let Some(f) = first {
        roots.retain(|&v| v != f);
        roots.insert(0, f);
    }
    for r in roots {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let mut stack = vec![r];
        while let Some(v) = stack.pop() {
            order.push(v);
            for (u, _, _) in h.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
    }
    order
}

fn run_search(
    h: &Graph,
    g: &Graph,
    first: Option<usize>,
    forced_seed: Option<NodeId>,
    node_cap: usize,
    budget: u64,
) -> Result<bool, OracleError> {
    let cap = node_cap.min(ABSOLUTE_NODE_CAP);
    if g.n() > cap {
        return Err(OracleError::TooLarge { cap, got: g.n() });
    }
    if h.n() == 0 {
        return Ok(true);
    }
    if h.n() > g.n() || h.m() > g.m() {
        return Ok(false);
    }
    // iterative deepening on the model size: minimal models surface fast,
    // the last pass is the unrestricted exhaustive search
    let mut s = Search::new(h, g, pattern_order(h, first));
    s.budget = budget;
    for used in h.n()..=g.n() {
        s.min_free = g.n() - used;
        if s.place(0, forced_seed)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// True iff `h` is a minor of `g`, by exhaustive connected-cluster search.
/// Refuses hosts above [`DEFAULT_NODE_CAP`] nodes.
pub fn brute_force_minor(h: &Graph, g: &Graph) -> Result<bool, OracleError> {
    brute_force_minor_with_limits(h, g, DEFAULT_NODE_CAP, DEFAULT_BUDGET)
}

/// Same search with an explicit host-size cap and step budget.
pub fn brute_force_minor_with_limits(
    h: &Graph,
    g: &Graph,
    node_cap: usize,
    budget: u64,
) -> Result<bool, OracleError> {
    run_search(h, g, None, None, node_cap, budget)
}

/// True iff `h` is a rooted minor of `g`: a minor model whose cluster for the
/// root of `h` contains the root of `g`.
pub fn brute_force_rooted_minor(h: &RootedTree, g: &RootedTree) -> Result<bool, OracleError> {
    brute_force_rooted_minor_with_limits(h, g, DEFAULT_NODE_CAP, DEFAULT_BUDGET)
}

pub fn brute_force_rooted_minor_with_limits(
    h: &RootedTree,
    g: &RootedTree,
    node_cap: usize,
    budget: u64,
) -> Result<bool, OracleError> {
    run_search(h.graph(), g.graph(), Some(h.root()), Some(g.root()), node_cap, budget)
}
