//! Planarity testing.
//!
//! The primary test is the classical face-by-face embedding algorithm
//! (Demoucron, Malgrange, Pertuiset): split into biconnected components,
//! start each from a cycle, and repeatedly embed a path of some bridge into
//! an admissible face, rejecting as soon as a bridge has no admissible face.
//! Quadratic and exact.
//!
//! [`is_planar_by_forbidden_minors`] is the desk-scale reference route via
//! exhaustive K5/K33 minor search; the suites cross-validate the two.

use crate::graph::{Graph, NodeId};
use crate::minor::{brute_force_minor_with_limits, OracleError};
use std::collections::{BTreeSet, VecDeque};

/// Minor-safe shrinking used by the reference route: delete isolated and
/// pendant nodes and contract through degree-2 nodes, sound because both
/// forbidden patterns have minimum degree 3.
fn reduce(adj: &mut Vec<BTreeSet<NodeId>>) {
    loop {
        let mut changed = false;
        for v in 0..adj.len() {
            match adj[v].len() {
                0 => {}
                1 => {
                    let u = *adj[v].iter().next().unwrap();
                    adj[u].remove(&v);
                    adj[v].clear();
                    changed = true;
                }
                2 => {
                    let mut it = adj[v].iter();
                    let a = *it.next().unwrap();
                    let b = *it.next().unwrap();
                    adj[a].remove(&v);
                    adj[b].remove(&v);
                    adj[v].clear();
                    if a != b {
                        adj[a].insert(b);
                        adj[b].insert(a);
                    }
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return;
        }
    }
}

fn component_graphs(adj: &[BTreeSet<NodeId>]) -> Vec<Graph> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] || adj[s].is_empty() {
            continue;
        }
        let mut nodes = vec![s];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    nodes.push(u);
                    q.push_back(u);
                }
            }
        }
        nodes.sort_unstable();
        let local: std::collections::BTreeMap<NodeId, usize> =
            nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        for &v in &nodes {
            for &u in &adj[v] {
                if v < u {
                    edges.push((local[&v], local[&u]));
                }
            }
        }
        out.push(Graph::from_plain_edges(nodes.len(), &edges));
    }
    out
}

/// Reference implementation: a graph is planar iff it has neither a K5 nor a
/// K33 minor. Exhaustive after minor-safe reductions, so only usable on
/// desk-scale inputs; the error reports hosts that stay too large.
pub fn is_planar_by_forbidden_minors(g: &Graph) -> Result<bool, OracleError> {
    let mut adj: Vec<BTreeSet<NodeId>> = (0..g.n())
        .map(|v| g.neighbors(v).map(|(u, _, _)| u).collect())
        .collect();
    reduce(&mut adj);
    let k5 = Graph::complete(5);
    let k33 = Graph::complete_bipartite(3, 3);
    for comp in component_graphs(&adj) {
        if comp.n() >= 3 && comp.m() > 3 * comp.n() - 6 {
            return Ok(false);
        }
        if brute_force_minor_with_limits(&k5, &comp, 16, 200_000_000)? {
            return Ok(false);
        }
        if brute_force_minor_with_limits(&k33, &comp, 16, 200_000_000)? {
            return Ok(false);
        }
    }
    Ok(true)
}

// ----- face-by-face embedding -----

/// Biconnected components as edge lists, via the DFS edge-stack method.
fn biconnected_components(g: &Graph) -> Vec<Vec<(NodeId, NodeId)>> {
    let n = g.n();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut comps = Vec::new();
    let mut estack: Vec<(NodeId, NodeId)> = Vec::new();
    let mut timer = 0usize;

    // iterative DFS to keep deep graphs safe
    for start in 0..n {
        if disc[start] != usize::MAX {
            continue;
        }
        let mut stack: Vec<(NodeId, Option<NodeId>, Vec<NodeId>, usize)> =
            vec![(start, None, g.neighbors(start).map(|(u, _, _)| u).collect(), 0)];
        disc[start] = timer;
        low[start] = timer;
        timer += 1;
        while let Some(frame) = stack.last_mut() {
            let (v, parent, nbrs, idx) = (frame.0, frame.1, frame.2.clone(), frame.3);
            if idx < nbrs.len() {
                frame.3 += 1;
                let u = nbrs[idx];
                if Some(u) == parent {
                    continue;
                }
                if disc[u] == usize::MAX {
                    estack.push((v, u));
                    disc[u] = timer;
                    low[u] = timer;
                    timer += 1;
                    stack.push((u, Some(v), g.neighbors(u).map(|(w, _, _)| w).collect(), 0));
                } else if disc[u] < disc[v] {
                    estack.push((v, u));
                    low[v] = low[v].min(disc[u]);
                }
            } else {
                stack.pop();
                if let Some(pframe) = stack.last() {
                    let p = pframe.0;
                    low[p] = low[p].min(low[v]);
                    if low[v] >= disc[p] {
                        // p closes a biconnected component
                        let mut comp = Vec::new();
                        while let Some(&(a, b)) = estack.last() {
                            if disc[a] >= disc[v] || (a, b) == (p, v) {
                                comp.push(estack.pop().unwrap());
                                if (a, b) == (p, v) {
                                    break;
                                }
                            } else {
                                break;
                            }
                        }
                        if !comp.is_empty() {
                            comps.push(comp);
                        }
                    }
                }
            }
        }
    }
    comps
}

/// Face-by-face embedding of one simple biconnected graph.
fn embed_biconnected(g: &Graph) -> bool {
    let n = g.n();
    let m = g.m();
    if n <= 3 || m <= 3 {
        return true;
    }
    if m > 3 * n - 6 {
        return false;
    }

    // initial cycle by walking parents from a back edge
    let cycle: Vec<NodeId> = {
        let mut parent = vec![usize::MAX; n];
        let mut state = vec![0u8; n];
        let mut found: Option<(NodeId, NodeId)> = None;
        let mut stack = vec![0usize];
        state[0] = 1;
        'dfs: while let Some(&v) = stack.last() {
            let mut advanced = false;
            for (u, _, _) in g.neighbors(v) {
                if state[u] == 0 {
                    state[u] = 1;
                    parent[u] = v;
                    stack.push(u);
                    advanced = true;
                    break;
                } else if state[u] == 1 && parent[v] != u {
                    found = Some((v, u));
                    break 'dfs;
                }
            }
            if !advanced {
                state[v] = 2;
                stack.pop();
            }
        }
        let (v, u) = found.expect("biconnected graphs with m > 3 contain a cycle");
        let mut c = vec![v];
        let mut x = v;
        while x != u {
            x = parent[x];
            c.push(x);
        }
        c
    };

    let mut embedded = vec![false; n];
    let mut edge_done: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let key = |a: NodeId, b: NodeId| (a.min(b), a.max(b));
    for &v in &cycle {
        embedded[v] = true;
    }
    for i in 0..cycle.len() {
        edge_done.insert(key(cycle[i], cycle[(i + 1) % cycle.len()]));
    }
    let mut faces: Vec<Vec<NodeId>> = vec![cycle.clone(), cycle.iter().rev().copied().collect()];

    while edge_done.len() < m {
        // bridges: chords plus components of the unembedded part
        struct Bridge {
            attachments: Vec<NodeId>,
            /// a path between two attachments: [a, interior.., b]
            path: Vec<NodeId>,
        }
        let mut bridges: Vec<Bridge> = Vec::new();
        for e in g.edges() {
            if embedded[e.a] && embedded[e.b] && !edge_done.contains(&key(e.a, e.b)) {
                bridges.push(Bridge { attachments: vec![e.a, e.b], path: vec![e.a, e.b] });
            }
        }
        let mut comp_id = vec![usize::MAX; n];
        let mut next_comp = 0usize;
        for s in 0..n {
            if embedded[s] || comp_id[s] != usize::MAX {
                continue;
            }
            let id = next_comp;
            next_comp += 1;
            let mut nodes = vec![s];
            comp_id[s] = id;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for (u, _, _) in g.neighbors(v) {
                    if !embedded[u] && comp_id[u] == usize::MAX {
                        comp_id[u] = id;
                        nodes.push(u);
                        q.push_back(u);
                    }
                }
            }
            let mut attachments: BTreeSet<NodeId> = BTreeSet::new();
            for &v in &nodes {
                for (u, _, _) in g.neighbors(v) {
                    if embedded[u] {
                        attachments.insert(u);
                    }
                }
            }
            let attachments: Vec<NodeId> = attachments.into_iter().collect();
            debug_assert!(attachments.len() >= 2, "biconnected graphs leave no pendant bridge");
            // path between the first two attachments through the component
            let (a, b) = (attachments[0], attachments[1]);
            let mut prev = vec![usize::MAX; n];
            let mut q = VecDeque::new();
            for (u, _, _) in g.neighbors(a) {
                if !embedded[u] && comp_id[u] == id && prev[u] == usize::MAX {
                    prev[u] = a;
                    q.push_back(u);
                }
            }
            let mut hit = usize::MAX;
            'bfs: while let Some(v) = q.pop_front() {
                for (u, _, _) in g.neighbors(v) {
                    if u == b {
                        hit = v;
                        break 'bfs;
                    }
                    if !embedded[u] && prev[u] == usize::MAX {
                        prev[u] = v;
                        q.push_back(u);
                    }
                }
            }
            assert!(hit != usize::MAX, "attachments of one bridge are connected through it");
            let mut path = vec![b];
            let mut x = hit;
            while x != a {
                path.push(x);
                x = prev[x];
            }
            path.push(a);
            path.reverse();
            bridges.push(Bridge { attachments, path });
        }

        // admissible faces per bridge
        let face_sets: Vec<BTreeSet<NodeId>> =
            faces.iter().map(|f| f.iter().copied().collect()).collect();
        let mut chosen: Option<(usize, usize)> = None;
        let mut single_choice: Option<(usize, usize)> = None;
        for (bi, br) in bridges.iter().enumerate() {
            let adm: Vec<usize> = (0..faces.len())
                .filter(|&fi| br.attachments.iter().all(|a| face_sets[fi].contains(a)))
                .collect();
            match adm.len() {
                0 => return false,
                1 => {
                    single_choice = Some((bi, adm[0]));
                }
                _ => {
                    if chosen.is_none() {
                        chosen = Some((bi, adm[0]));
                    }
                }
            }
        }
        let (bi, fi) = single_choice.or(chosen).expect("some bridge exists");
        let path = std::mem::take(&mut bridges[bi].path);
        let (a, b) = (path[0], *path.last().unwrap());
        let face = faces.swap_remove(fi);
        let pa = face.iter().position(|&v| v == a).unwrap();
        let pb = face.iter().position(|&v| v == b).unwrap();
        // two arcs of the face between a and b
        let arc = |from: usize, to: usize| -> Vec<NodeId> {
            let mut out = Vec::new();
            let mut i = from;
            loop {
                out.push(face[i]);
                if i == to {
                    break;
                }
                i = (i + 1) % face.len();
            }
            out
        };
        let arc_ab = arc(pa, pb);
        let arc_ba = arc(pb, pa);
        let interior: Vec<NodeId> = path[1..path.len() - 1].to_vec();
        let mut f1 = arc_ab.clone();
        f1.extend(interior.iter().rev());
        let mut f2 = arc_ba.clone();
        f2.extend(interior.iter());
        faces.push(f1);
        faces.push(f2);
        for w in path.windows(2) {
            edge_done.insert(key(w[0], w[1]));
        }
        for &v in &interior {
            embedded[v] = true;
        }
    }
    true
}

/// True iff `g` is planar.
pub fn is_planar(g: &Graph) -> bool {
    if g.n() >= 3 && g.m() > 3 * g.n() - 6 {
        return false;
    }
    for comp in biconnected_components(g) {
        let mut nodes: Vec<NodeId> = comp.iter().flat_map(|&(a, b)| [a, b]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let local: std::collections::BTreeMap<NodeId, usize> =
            nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let edges: Vec<(NodeId, NodeId)> =
            comp.iter().map(|&(a, b)| (local[&a], local[&b])).collect();
        let sub = Graph::from_plain_edges(nodes.len(), &edges);
        if !embed_biconnected(&sub) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::SplitMix;
    use crate::graph::GraphBuilder;

    fn grid(rows: usize, cols: usize) -> Graph {
        let mut b = GraphBuilder::new(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    b.plain_edge(v, v + 1).unwrap();
                }
                if r + 1 < rows {
                    b.plain_edge(v, v + cols).unwrap();
                }
            }
        }
        b.build().unwrap()
    }

    fn petersen() -> Graph {
        let mut edges = Vec::new();
        for v in 0..5 {
            edges.push((v, (v + 1) % 5));
            edges.push((v, v + 5));
            edges.push((v + 5, (v + 2) % 5 + 5));
        }
        Graph::from_plain_edges(10, &edges)
    }

    #[test]
    fn classical_facts() {
        assert!(is_planar(&Graph::complete(4)));
        assert!(!is_planar(&Graph::complete(5)));
        assert!(!is_planar(&Graph::complete_bipartite(3, 3)));
        assert!(!is_planar(&petersen()));
        assert!(is_planar(&grid(4, 5)));
        assert!(is_planar(&Graph::path(10)));
        assert!(is_planar(&Graph::cycle(8)));
        assert!(is_planar(&Graph::complete_bipartite(2, 7)));
        assert!(!is_planar(&Graph::complete(6)));
    }

    #[test]
    fn subdivision_preserves_nonplanarity() {
        // subdivide every edge of K5 once
        let k5 = Graph::complete(5);
        let mut b = GraphBuilder::new(5 + k5.m());
        for (i, e) in k5.edges().iter().enumerate() {
            let mid = 5 + i;
            b.plain_edge(e.a, mid).unwrap();
            b.plain_edge(mid, e.b).unwrap();
        }
        assert!(!is_planar(&b.build().unwrap()));
    }

    #[test]
    fn disjoint_union_with_nonplanar_part() {
        let mut b = GraphBuilder::new(15);
        for u in 0..5 {
            for v in u + 1..5 {
                b.plain_edge(u, v).unwrap();
            }
        }
        for v in 5..14 {
            b.plain_edge(v, v + 1).unwrap();
        }
        assert!(!is_planar(&b.build().unwrap()));
    }

    #[test]
    fn subgraphs_of_planar_graphs_stay_planar() {
        let g = grid(4, 4);
        for skip in 0..g.m() {
            let mut b = GraphBuilder::new(g.n());
            for (i, e) in g.edges().iter().enumerate() {
                if i != skip {
                    b.plain_edge(e.a, e.b).unwrap();
                }
            }
            assert!(is_planar(&b.build().unwrap()));
        }
    }

    #[test]
    fn wheel_and_octahedron() {
        let mut b = GraphBuilder::new(9);
        for v in 1..=8 {
            b.plain_edge(0, v).unwrap();
            b.plain_edge(v, if v == 8 { 1 } else { v + 1 }).unwrap();
        }
        assert!(is_planar(&b.build().unwrap()));
        let octa = Graph::from_plain_edges(
            6,
            &[
                (0, 1),
                (0, 2),
                (0, 3),
                (0, 4),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 1),
                (5, 1),
                (5, 2),
                (5, 3),
                (5, 4),
            ],
        );
        assert!(is_planar(&octa));
    }

    #[test]
    fn matches_forbidden_minor_reference_on_random_graphs() {
        let mut rng = SplitMix::new(99);
        let mut planar_seen = 0;
        let mut nonplanar_seen = 0;
        for _ in 0..120 {
            let n = 5 + rng.below(6);
            let mut b = GraphBuilder::new(n);
            let target_m = n + rng.below(2 * n);
            let mut added = BTreeSet::new();
            for _ in 0..target_m {
                let u = rng.below(n);
                let v = rng.below(n);
                if u != v && added.insert((u.min(v), u.max(v))) {
                    b.plain_edge(u, v).unwrap();
                }
            }
            let g = b.build().unwrap();
            let fast = is_planar(&g);
            let reference = is_planar_by_forbidden_minors(&g).unwrap();
            assert_eq!(fast, reference, "disagreement on {}", g.to_text());
            if fast {
                planar_seen += 1;
            } else {
                nonplanar_seen += 1;
            }
        }
        assert!(planar_seen > 5 && nonplanar_seen > 5, "sample covers both answers");
    }
}
