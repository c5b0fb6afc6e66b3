//! Finite labeled graphs, rooted trees, radius-d views, and the hard-instance
//! tree generator.
//!
//! Graphs are immutable after construction: build one through
//! [`GraphBuilder`], then share it freely. Every analysis in the crate reads
//! graphs through this module, and the locally checkable rules elsewhere are
//! evaluated exclusively through [`Ball`] views so their locality is enforced
//! by construction.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use thiserror::Error;

pub type NodeId = usize;

/// Default token for node inputs and edge types.
pub const DEFAULT_TOKEN: &str = "-";

/// Edge orientation relative to the canonical endpoint order (smaller id
/// first). `Forward` points from the smaller endpoint to the larger one.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Orientation {
    Forward,
    Backward,
    None,
}

impl Orientation {
    pub fn token(self) -> &'static str {
        match self {
            Orientation::Forward => "fwd",
            Orientation::Backward => "bwd",
            Orientation::None => DEFAULT_TOKEN,
        }
    }

    pub fn from_token(t: &str) -> Option<Self> {
        match t {
            "fwd" => Some(Orientation::Forward),
            "bwd" => Some(Orientation::Backward),
            DEFAULT_TOKEN => Some(Orientation::None),
            _ => None,
        }
    }
}

/// Direction of an edge as seen from one of its endpoints.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum RelDir {
    Out,
    In,
    Undirected,
}

impl RelDir {
    pub fn flip(self) -> Self {
        match self {
            RelDir::Out => RelDir::In,
            RelDir::In => RelDir::Out,
            RelDir::Undirected => RelDir::Undirected,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EdgeRec {
    pub a: NodeId,
    pub b: NodeId,
    pub etype: String,
    pub orient: Orientation,
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {0} out of range")]
    UnknownNode(NodeId),
    #[error("self loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("node {node} has degree {degree}, exceeding bound {bound}")]
    DegreeExceeded { node: NodeId, degree: usize, bound: usize },
    #[error("token {0:?} is empty or contains whitespace")]
    BadToken(String),
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: GraphError },
}

fn check_token(t: &str) -> Result<(), GraphError> {
    if t.is_empty() || t.chars().any(char::is_whitespace) {
        return Err(GraphError::BadToken(t.to_string()));
    }
    Ok(())
}

/// Builder for [`Graph`]. Node inputs default to `-`, edges to type `-` with
/// no orientation.
pub struct GraphBuilder {
    n: usize,
    input: Vec<String>,
    edges: Vec<EdgeRec>,
    seen: BTreeMap<(NodeId, NodeId), ()>,
    degree_bound: Option<usize>,
}

impl GraphBuilder {
    pub fn new(n: usize) -> Self {
        GraphBuilder {
            n,
            input: vec![DEFAULT_TOKEN.to_string(); n],
            edges: Vec::new(),
            seen: BTreeMap::new(),
            degree_bound: None,
        }
    }

    /// Declare the max-degree bound recorded in the graph header. When unset,
    /// the actual maximum degree is used.
    pub fn degree_bound(&mut self, d: usize) -> &mut Self {
        self.degree_bound = Some(d);
        self
    }

    pub fn set_input(&mut self, v: NodeId, label: &str) -> Result<&mut Self, GraphError> {
        if v >= self.n {
            return Err(GraphError::UnknownNode(v));
        }
        check_token(label)?;
        self.input[v] = label.to_string();
        Ok(self)
    }

    /// Add an edge. `orient` is interpreted relative to the argument order:
    /// `Forward` means `u -> v`.
    pub fn add_edge(
        &mut self,
        u: NodeId,
        v: NodeId,
        etype: &str,
        orient: Orientation,
    ) -> Result<&mut Self, GraphError> {
        if u >= self.n {
            return Err(GraphError::UnknownNode(u));
        }
        if v >= self.n {
            return Err(GraphError::UnknownNode(v));
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        check_token(etype)?;
        let (a, b, orient) = if u < v {
            (u, v, orient)
        } else {
            let flipped = match orient {
                Orientation::Forward => Orientation::Backward,
                Orientation::Backward => Orientation::Forward,
                Orientation::None => Orientation::None,
            };
            (v, u, flipped)
        };
        if self.seen.insert((a, b), ()).is_some() {
            return Err(GraphError::DuplicateEdge(a, b));
        }
        self.edges.push(EdgeRec { a, b, etype: etype.to_string(), orient });
        Ok(self)
    }

    pub fn plain_edge(&mut self, u: NodeId, v: NodeId) -> Result<&mut Self, GraphError> {
        self.add_edge(u, v, DEFAULT_TOKEN, Orientation::None)
    }

    pub fn build(mut self) -> Result<Graph, GraphError> {
        self.edges.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
        let mut adj: Vec<Vec<(NodeId, usize)>> = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.a].push((e.b, i));
            adj[e.b].push((e.a, i));
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        let actual = adj.iter().map(Vec::len).max().unwrap_or(0);
        let bound = self.degree_bound.unwrap_or(actual);
        if actual > bound {
            let node = adj.iter().position(|r| r.len() > bound).unwrap();
            return Err(GraphError::DegreeExceeded { node, degree: adj[node].len(), bound });
        }
        Ok(Graph { input: self.input, edges: self.edges, adj, max_degree: bound })
    }
}

/// An immutable simple graph with node input labels and typed, optionally
/// oriented edges.
#[derive(Clone, Debug)]
pub struct Graph {
    input: Vec<String>,
    edges: Vec<EdgeRec>,
    adj: Vec<Vec<(NodeId, usize)>>,
    max_degree: usize,
}

impl Graph {
    pub fn n(&self) -> usize {
        self.input.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn input(&self, v: NodeId) -> &str {
        &self.input[v]
    }

    pub fn edges(&self) -> &[EdgeRec] {
        &self.edges
    }

    /// Neighbors of `v` with the edge type and the direction as seen from `v`.
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = (NodeId, &str, RelDir)> + '_ {
        self.adj[v].iter().map(move |&(u, ei)| {
            let e = &self.edges[ei];
            let dir = match e.orient {
                Orientation::None => RelDir::Undirected,
                Orientation::Forward => {
                    if v == e.a {
                        RelDir::Out
                    } else {
                        RelDir::In
                    }
                }
                Orientation::Backward => {
                    if v == e.a {
                        RelDir::In
                    } else {
                        RelDir::Out
                    }
                }
            };
            (u, e.etype.as_str(), dir)
        })
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj[u].binary_search_by_key(&v, |&(w, _)| w).is_ok()
            || self.adj[u].iter().any(|&(w, _)| w == v)
    }

    /// Edge attributes between `u` and `v` with direction seen from `u`.
    pub fn edge_from(&self, u: NodeId, v: NodeId) -> Option<(&str, RelDir)> {
        self.neighbors(u).find(|&(w, _, _)| w == v).map(|(_, t, d)| (t, d))
    }

    pub fn bfs_dist(&self, from: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        let mut q = VecDeque::new();
        dist[from] = Some(0);
        q.push_back(from);
        while let Some(v) = q.pop_front() {
            let d = dist[v].unwrap();
            for &(u, _) in &self.adj[v] {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    q.push_back(u);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return true;
        }
        self.bfs_dist(0).iter().all(Option::is_some)
    }

    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut comp = vec![usize::MAX; self.n()];
        let mut out: Vec<Vec<NodeId>> = Vec::new();
        for s in 0..self.n() {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut nodes = vec![s];
            comp[s] = id;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for &(u, _) in &self.adj[v] {
                    if comp[u] == usize::MAX {
                        comp[u] = id;
                        nodes.push(u);
                        q.push_back(u);
                    }
                }
            }
            nodes.sort_unstable();
            out.push(nodes);
        }
        out
    }

    /// True when the graph has no cycle.
    pub fn is_forest(&self) -> bool {
        self.n() == 0 || self.m() + self.components().len() == self.n()
    }

    pub fn is_tree(&self) -> bool {
        self.n() > 0 && self.is_connected() && self.m() + 1 == self.n()
    }

    /// Induced subgraph on `nodes` (which must be sorted and deduplicated).
    /// Returns the subgraph and the map from old to new ids.
    pub fn induced(&self, nodes: &[NodeId]) -> (Graph, BTreeMap<NodeId, NodeId>) {
        let map: BTreeMap<NodeId, NodeId> =
            nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut b = GraphBuilder::new(nodes.len());
        for (&old, &new) in &map {
            b.set_input(new, self.input(old)).unwrap();
        }
        for e in &self.edges {
            if let (Some(&na), Some(&nb)) = (map.get(&e.a), map.get(&e.b)) {
                b.add_edge(na, nb, &e.etype, e.orient).unwrap();
            }
        }
        (b.build().unwrap(), map)
    }

    // ----- text format -----

    /// Canonical text form: `graph <n> <delta>` header, `node` lines in id
    /// order, `edge` lines in canonical (a, b) order. Parsing this form and
    /// printing again reproduces the input byte for byte.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "graph {} {}", self.n(), self.max_degree).unwrap();
        for v in 0..self.n() {
            writeln!(s, "node {} {}", v, self.input[v]).unwrap();
        }
        for e in &self.edges {
            writeln!(s, "edge {} {} {} {}", e.a, e.b, e.etype, e.orient.token()).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Graph, ParseError> {
        let mut builder: Option<GraphBuilder> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = trimmed.split_whitespace().collect();
            let malformed = |msg: &str| ParseError::Malformed { line, msg: msg.to_string() };
            match (toks[0], builder.as_mut()) {
                ("graph", None) => {
                    if toks.len() != 3 {
                        return Err(malformed("expected: graph <n> <delta>"));
                    }
                    let n: usize =
                        toks[1].parse().map_err(|_| malformed("bad node count"))?;
                    let d: usize =
                        toks[2].parse().map_err(|_| malformed("bad degree bound"))?;
                    let mut b = GraphBuilder::new(n);
                    b.degree_bound(d);
                    builder = Some(b);
                }
                ("graph", Some(_)) => return Err(malformed("duplicate graph header")),
                (_, None) => return Err(malformed("missing graph header")),
                ("node", Some(b)) => {
                    if toks.len() != 3 {
                        return Err(malformed("expected: node <id> <label>"));
                    }
                    let v: usize = toks[1].parse().map_err(|_| malformed("bad node id"))?;
                    b.set_input(v, toks[2])
                        .map_err(|source| ParseError::Graph { line, source })?;
                }
                ("edge", Some(b)) => {
                    if toks.len() != 5 {
                        return Err(malformed("expected: edge <u> <v> <type> <orientation>"));
                    }
                    let u: usize = toks[1].parse().map_err(|_| malformed("bad endpoint"))?;
                    let v: usize = toks[2].parse().map_err(|_| malformed("bad endpoint"))?;
                    let orient = Orientation::from_token(toks[4])
                        .ok_or_else(|| malformed("orientation must be fwd, bwd, or -"))?;
                    b.add_edge(u, v, toks[3], orient)
                        .map_err(|source| ParseError::Graph { line, source })?;
                }
                _ => return Err(malformed("unknown directive")),
            }
        }
        match builder {
            Some(b) => b.build().map_err(|source| ParseError::Graph { line: 0, source }),
            None => Err(ParseError::Malformed { line: 0, msg: "empty input".to_string() }),
        }
    }

    // ----- small constructors used across tests and the CLI -----

    pub fn path(n: usize) -> Graph {
        let mut b = GraphBuilder::new(n);
        for v in 1..n {
            b.plain_edge(v - 1, v).unwrap();
        }
        b.build().unwrap()
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3);
        let mut b = GraphBuilder::new(n);
        for v in 0..n {
            b.plain_edge(v, (v + 1) % n).unwrap();
        }
        b.build().unwrap()
    }

    /// Star with `leaves` leaves; node 0 is the center.
    pub fn star(leaves: usize) -> Graph {
        let mut b = GraphBuilder::new(leaves + 1);
        for v in 1..=leaves {
            b.plain_edge(0, v).unwrap();
        }
        b.build().unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        let mut b = GraphBuilder::new(n);
        for u in 0..n {
            for v in u + 1..n {
                b.plain_edge(u, v).unwrap();
            }
        }
        b.build().unwrap()
    }

    pub fn complete_bipartite(a: usize, b_: usize) -> Graph {
        let mut b = GraphBuilder::new(a + b_);
        for u in 0..a {
            for v in 0..b_ {
                b.plain_edge(u, a + v).unwrap();
            }
        }
        b.build().unwrap()
    }

    pub fn from_plain_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Graph {
        let mut b = GraphBuilder::new(n);
        for &(u, v) in edges {
            b.plain_edge(u, v).unwrap();
        }
        b.build().unwrap()
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum TreeError {
    #[error("graph is not a tree")]
    NotATree,
    #[error("root {0} out of range")]
    UnknownRoot(NodeId),
}

/// A tree with a distinguished root and the parent/child relation derived
/// from it.
#[derive(Clone, Debug)]
pub struct RootedTree {
    graph: Graph,
    root: NodeId,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
}

impl RootedTree {
    pub fn new(graph: Graph, root: NodeId) -> Result<Self, TreeError> {
        if root >= graph.n() {
            return Err(TreeError::UnknownRoot(root));
        }
        if !graph.is_tree() {
            return Err(TreeError::NotATree);
        }
        let mut parent = vec![None; graph.n()];
        let mut children = vec![Vec::new(); graph.n()];
        let mut seen = vec![false; graph.n()];
        seen[root] = true;
        let mut q = VecDeque::from([root]);
        while let Some(v) = q.pop_front() {
            for (u, _, _) in graph.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = Some(v);
                    children[v].push(u);
                    q.push_back(u);
                }
            }
        }
        Ok(RootedTree { graph, root, parent, children })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    /// Children-before-parent order.
    pub fn post_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.n());
        let mut stack = vec![(self.root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                out.push(v);
            } else {
                stack.push((v, true));
                for &c in &self.children[v] {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![1usize; self.n()];
        for v in self.post_order() {
            for &c in &self.children[v] {
                size[v] += size[c];
            }
        }
        size
    }

    /// Re-root the same underlying tree at `new_root`.
    pub fn rerooted(&self, new_root: NodeId) -> Result<RootedTree, TreeError> {
        RootedTree::new(self.graph.clone(), new_root)
    }
}

/// Spine and subtree layout of a generated hard-instance tree, used by the
/// constructive path decomposition.
#[derive(Clone, Debug)]
pub(crate) struct TreeSkeleton {
    pub spine: Vec<NodeId>,
    pub subtrees: Vec<TreeSkeleton>,
}

#[derive(Error, Debug, PartialEq, Eq)]
#[error("parameters must satisfy k >= 1 and s >= 1 (got k={k}, s={s})")]
pub struct InvalidParameter {
    pub k: usize,
    pub s: usize,
}

fn build_t_edges(
    k: usize,
    s: usize,
    next: &mut NodeId,
    edges: &mut Vec<(NodeId, NodeId)>,
) -> TreeSkeleton {
    let spine: Vec<NodeId> = (0..s)
        .map(|_| {
            let id = *next;
            *next += 1;
            id
        })
        .collect();
    for w in spine.windows(2) {
        edges.push((w[0], w[1]));
    }
    let mut subtrees = Vec::new();
    if k > 1 {
        for j in 0..s {
            let sub = build_t_edges(k - 1, s, next, edges);
            edges.push((spine[j], sub.spine[0]));
            subtrees.push(sub);
        }
    }
    TreeSkeleton { spine, subtrees }
}

pub(crate) fn generate_t_with_skeleton(
    k: usize,
    s: usize,
) -> Result<(RootedTree, TreeSkeleton), InvalidParameter> {
    if k < 1 || s < 1 {
        return Err(InvalidParameter { k, s });
    }
    let mut next = 0;
    let mut edges = Vec::new();
    let skel = build_t_edges(k, s, &mut next, &mut edges);
    let g = Graph::from_plain_edges(next, &edges);
    let root = skel.spine[0];
    Ok((RootedTree::new(g, root).unwrap(), skel))
}

/// The level-`k`, span-`s` hard-instance tree: an `s`-node spine where, for
/// `k > 1`, every spine node carries a fresh level-`k-1` copy. Rooted at the
/// first spine node.
pub fn generate_t(k: usize, s: usize) -> Result<RootedTree, InvalidParameter> {
    generate_t_with_skeleton(k, s).map(|(t, _)| t)
}

// ----- radius-d views -----

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IdMode {
    WithIds,
    IdFree,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BallEdge {
    pub to: usize,
    pub etype: String,
    pub dir: RelDir,
}

/// The induced radius-d view around a center: inputs, edge types and
/// orientations, optional identifiers, and optional per-node output
/// decorations. Node indices are local to the view; `center` is always 0.
#[derive(Clone, Debug)]
pub struct Ball {
    pub id_mode: IdMode,
    pub radius: usize,
    pub center: usize,
    pub dist: Vec<usize>,
    pub input: Vec<String>,
    pub ids: Vec<Option<u64>>,
    pub output: Vec<Option<String>>,
    pub adj: Vec<Vec<BallEdge>>,
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum BallError {
    #[error("node {0} not in graph")]
    UnknownNode(NodeId),
    #[error("balls have different id modes")]
    InvalidComparison,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[BallEdge] {
        &self.adj[v]
    }

    pub fn edge_from(&self, u: usize, v: usize) -> Option<(&str, RelDir)> {
        self.adj[u].iter().find(|e| e.to == v).map(|e| (e.etype.as_str(), e.dir))
    }

    /// Re-center the view at a node of this ball, keeping only radius `r`
    /// around it. Sound whenever `dist[v] + r <= self.radius`: every shortest
    /// path of length at most `r` from `v` then lies inside this view.
    pub fn sub_ball(&self, v: usize, r: usize) -> Ball {
        assert!(
            self.dist[v] + r <= self.radius,
            "sub_ball out of certified range: dist {} + r {} > radius {}",
            self.dist[v],
            r,
            self.radius
        );
        let mut dist = vec![usize::MAX; self.len()];
        let mut order = Vec::new();
        dist[v] = 0;
        order.push(v);
        let mut q = VecDeque::from([v]);
        while let Some(x) = q.pop_front() {
            if dist[x] == r {
                continue;
            }
            for e in &self.adj[x] {
                if dist[e.to] == usize::MAX {
                    dist[e.to] = dist[x] + 1;
                    order.push(e.to);
                    q.push_back(e.to);
                }
            }
        }
        let mut local = vec![usize::MAX; self.len()];
        for (i, &x) in order.iter().enumerate() {
            local[x] = i;
        }
        let adj = order
            .iter()
            .map(|&x| {
                self.adj[x]
                    .iter()
                    .filter(|e| local[e.to] != usize::MAX)
                    .map(|e| BallEdge { to: local[e.to], etype: e.etype.clone(), dir: e.dir })
                    .collect()
            })
            .collect();
        Ball {
            id_mode: self.id_mode,
            radius: r,
            center: 0,
            dist: order.iter().map(|&x| dist[x]).collect(),
            input: order.iter().map(|&x| self.input[x].clone()).collect(),
            ids: order.iter().map(|&x| self.ids[x]).collect(),
            output: order.iter().map(|&x| self.output[x].clone()).collect(),
            adj,
        }
    }
}

/// Radius-d view around `v` with optional per-node decorations supplied by
/// `ids` and `output`.
pub fn ball_with(
    g: &Graph,
    v: NodeId,
    d: usize,
    id_mode: IdMode,
    ids: impl Fn(NodeId) -> Option<u64>,
    output: impl Fn(NodeId, usize) -> Option<String>,
) -> Result<Ball, BallError> {
    if v >= g.n() {
        return Err(BallError::UnknownNode(v));
    }
    let mut dist_all = vec![usize::MAX; g.n()];
    let mut order = vec![v];
    dist_all[v] = 0;
    let mut q = VecDeque::from([v]);
    while let Some(x) = q.pop_front() {
        if dist_all[x] == d {
            continue;
        }
        for (u, _, _) in g.neighbors(x) {
            if dist_all[u] == usize::MAX {
                dist_all[u] = dist_all[x] + 1;
                order.push(u);
                q.push_back(u);
            }
        }
    }
    let mut local = vec![usize::MAX; g.n()];
    for (i, &x) in order.iter().enumerate() {
        local[x] = i;
    }
    let adj: Vec<Vec<BallEdge>> = order
        .iter()
        .map(|&x| {
            g.neighbors(x)
                .filter(|&(u, _, _)| local[u] != usize::MAX)
                .map(|(u, t, dir)| BallEdge { to: local[u], etype: t.to_string(), dir })
                .collect()
        })
        .collect();
    Ok(Ball {
        id_mode,
        radius: d,
        center: 0,
        dist: order.iter().map(|&x| dist_all[x]).collect(),
        input: order.iter().map(|&x| g.input(x).to_string()).collect(),
        ids: match id_mode {
            IdMode::WithIds => order.iter().map(|&x| ids(x)).collect(),
            IdMode::IdFree => vec![None; order.len()],
        },
        output: order.iter().map(|&x| output(x, dist_all[x])).collect(),
        adj,
    })
}

/// Radius-d view with no output decoration; in `WithIds` mode the node index
/// itself is used as the identifier.
pub fn ball(g: &Graph, v: NodeId, d: usize, id_mode: IdMode) -> Result<Ball, BallError> {
    ball_with(g, v, d, id_mode, |u| Some(u as u64), |_, _| None)
}

// ----- view isomorphism -----

type NodeKey = (usize, String, Option<u64>, Option<String>);

fn node_key(b: &Ball, v: usize) -> NodeKey {
    (b.dist[v], b.input[v].clone(), b.ids[v], b.output[v].clone())
}

/// Signature used to prefilter candidate pairs: node key plus the sorted
/// multiset of incident edge attributes and neighbor keys.
fn node_sig(b: &Ball, v: usize) -> (NodeKey, Vec<(String, RelDir, NodeKey)>) {
    let mut inc: Vec<(String, RelDir, NodeKey)> = b.adj[v]
        .iter()
        .map(|e| (e.etype.clone(), e.dir, node_key(b, e.to)))
        .collect();
    inc.sort();
    (node_key(b, v), inc)
}

fn is_acyclic(b: &Ball) -> bool {
    // The view is connected by construction.
    let m: usize = b.adj.iter().map(Vec::len).sum::<usize>() / 2;
    m + 1 == b.len()
}

fn tree_encoding(b: &Ball, v: usize, parent: Option<usize>) -> String {
    let mut parts: Vec<String> = b.adj[v]
        .iter()
        .filter(|e| Some(e.to) != parent)
        .map(|e| format!("{}|{:?}|{}", e.etype, e.dir, tree_encoding(b, e.to, Some(v))))
        .collect();
    parts.sort();
    format!("({:?};{})", node_key(b, v), parts.join(","))
}

fn backtrack_iso(a: &Ball, b: &Ball) -> bool {
    let n = a.len();
    let sig_b: Vec<_> = (0..n).map(|v| node_sig(b, v)).collect();
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(n);
    for v in 0..n {
        let sv = node_sig(a, v);
        candidates.push((0..n).filter(|&w| sig_b[w] == sv).collect());
    }
    // Map in BFS order from the center so every node after the first has a
    // mapped neighbor.
    let order: Vec<usize> = {
        let mut seen = vec![false; n];
        let mut out = vec![a.center];
        seen[a.center] = true;
        let mut q = VecDeque::from([a.center]);
        while let Some(x) = q.pop_front() {
            for e in &a.adj[x] {
                if !seen[e.to] {
                    seen[e.to] = true;
                    out.push(e.to);
                    q.push_back(e.to);
                }
            }
        }
        out
    };
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn consistent(a: &Ball, b: &Ball, map: &[usize], v: usize, w: usize) -> bool {
        for e in &a.adj[v] {
            let mu = map[e.to];
            if mu == usize::MAX {
                continue;
            }
            match b.edge_from(w, mu) {
                Some((t, d)) if t == e.etype && d == e.dir => {}
                _ => return false,
            }
        }
        // Induced views: mapped non-neighbors must stay non-neighbors.
        let nbr_count = a.adj[v].iter().filter(|e| map[e.to] != usize::MAX).count();
        let image_count = b.adj[w].iter().filter(|e| map.contains(&e.to)).count();
        nbr_count == image_count
    }

    fn go(
        a: &Ball,
        b: &Ball,
        order: &[usize],
        candidates: &[Vec<usize>],
        map: &mut [usize],
        used: &mut [bool],
        i: usize,
    ) -> bool {
        if i == order.len() {
            return true;
        }
        let v = order[i];
        for &w in &candidates[v] {
            if used[w] || (i == 0 && w != b.center) {
                continue;
            }
            if !consistent(a, b, map, v, w) {
                continue;
            }
            map[v] = w;
            used[w] = true;
            if go(a, b, order, candidates, map, used, i + 1) {
                return true;
            }
            map[v] = usize::MAX;
            used[w] = false;
        }
        false
    }

    go(a, b, &order, &candidates, &mut map, &mut used, 0)
}

/// Center-preserving isomorphism of two views, respecting inputs, edge types,
/// orientations, outputs, and (in `WithIds` mode) identifiers.
///
/// Acyclic views are compared by a canonical encoding; views with cycles fall
/// back to an exact backtracking search.
pub fn ball_isomorphic(a: &Ball, b: &Ball) -> Result<bool, BallError> {
    if a.id_mode != b.id_mode {
        return Err(BallError::InvalidComparison);
    }
    if a.len() != b.len() || a.radius != b.radius {
        return Ok(false);
    }
    let mut sa: Vec<_> = (0..a.len()).map(|v| node_sig(a, v)).collect();
    let mut sb: Vec<_> = (0..b.len()).map(|v| node_sig(b, v)).collect();
    if sa[a.center] != sb[b.center] {
        return Ok(false);
    }
    sa.sort();
    sb.sort();
    if sa != sb {
        return Ok(false);
    }
    let acyclic_a = is_acyclic(a);
    if acyclic_a != is_acyclic(b) {
        return Ok(false);
    }
    if acyclic_a {
        return Ok(tree_encoding(a, a.center, None) == tree_encoding(b, b.center, None));
    }
    Ok(backtrack_iso(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent oracle for the node count: n(1,s) = s, n(k,s) = s + s*n(k-1,s).
    fn count_recursion(k: usize, s: usize) -> usize {
        if k == 1 {
            s
        } else {
            s + s * count_recursion(k - 1, s)
        }
    }

    #[test]
    fn generate_t_base_is_path() {
        let t = generate_t(1, 5).unwrap();
        assert_eq!(t.n(), 5);
        assert!(t.graph().is_tree());
        assert_eq!(t.graph().degree(t.root()), 1);
        // path: two endpoints, rest degree 2
        let degs: Vec<usize> = (0..5).map(|v| t.graph().degree(v)).collect();
        assert_eq!(degs.iter().filter(|&&d| d == 1).count(), 2);
        assert_eq!(degs.iter().filter(|&&d| d == 2).count(), 3);
    }

    #[test]
    fn generate_t_counts_match_recursion_oracle() {
        assert_eq!(generate_t(2, 3).unwrap().n(), 12);
        assert_eq!(generate_t(3, 3).unwrap().n(), 39);
        for k in 1..=4 {
            for s in 1..=5 {
                let t = generate_t(k, s).unwrap();
                assert_eq!(t.n(), count_recursion(k, s), "k={k} s={s}");
                assert!(t.graph().is_tree());
            }
        }
    }

    #[test]
    fn generate_t_closed_form_node_count() {
        // (s^(k+1) - s) / (s - 1) for s > 1, and k for s = 1.
        for k in 1..=4usize {
            for s in 1..=5usize {
                let expect = if s == 1 {
                    k
                } else {
                    (s.pow(k as u32 + 1) - s) / (s - 1)
                };
                assert_eq!(generate_t(k, s).unwrap().n(), expect);
            }
        }
    }

    #[test]
    fn generate_t_rejects_bad_parameters() {
        assert!(generate_t(0, 3).is_err());
        assert!(generate_t(3, 0).is_err());
    }

    #[test]
    fn ball_radius_zero_is_just_the_center() {
        let g = Graph::path(4);
        let b = ball(&g, 2, 0, IdMode::IdFree).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.input[0], DEFAULT_TOKEN);
    }

    #[test]
    fn ball_of_six_cycle_radius_three_is_everything() {
        let g = Graph::cycle(6);
        let b = ball(&g, 1, 3, IdMode::IdFree).unwrap();
        assert_eq!(b.len(), 6);
    }

    #[test]
    fn ball_on_t23_root_radius_one() {
        let t = generate_t(2, 3).unwrap();
        let b = ball(t.graph(), t.root(), 1, IdMode::IdFree).unwrap();
        // root, spine successor, and the root of the first hanging path
        assert_eq!(b.len(), 3);
        assert_eq!(b.dist.iter().filter(|&&d| d == 1).count(), 2);
    }

    #[test]
    fn ball_unknown_node_errors() {
        let g = Graph::path(3);
        assert_eq!(ball(&g, 7, 1, IdMode::IdFree).unwrap_err(), BallError::UnknownNode(7));
    }

    #[test]
    fn ball_isomorphic_identity_and_degree_mismatch() {
        let t = generate_t(2, 3).unwrap();
        let g = t.graph();
        let b1 = ball(g, t.root(), 1, IdMode::IdFree).unwrap();
        assert!(ball_isomorphic(&b1, &b1).unwrap());
        // degree-2 node vs degree-3 node at radius 1
        let deg2 = (0..g.n()).find(|&v| g.degree(v) == 2).unwrap();
        let deg3 = (0..g.n()).find(|&v| g.degree(v) == 3).unwrap();
        let a = ball(g, deg2, 1, IdMode::IdFree).unwrap();
        let b = ball(g, deg3, 1, IdMode::IdFree).unwrap();
        assert!(!ball_isomorphic(&a, &b).unwrap());
    }

    #[test]
    fn ball_isomorphic_on_vertex_transitive_cycle() {
        let g = Graph::cycle(10);
        let a = ball(&g, 2, 2, IdMode::IdFree).unwrap();
        let b = ball(&g, 7, 2, IdMode::IdFree).unwrap();
        assert!(ball_isomorphic(&a, &b).unwrap());
    }

    #[test]
    fn ball_isomorphic_rejects_mixed_modes() {
        let g = Graph::path(3);
        let a = ball(&g, 0, 1, IdMode::IdFree).unwrap();
        let b = ball(&g, 0, 1, IdMode::WithIds).unwrap();
        assert_eq!(ball_isomorphic(&a, &b).unwrap_err(), BallError::InvalidComparison);
    }

    #[test]
    fn with_ids_distinguishes_identical_shapes() {
        let g = Graph::path(5);
        let a = ball(&g, 1, 1, IdMode::WithIds).unwrap();
        let b = ball(&g, 3, 1, IdMode::WithIds).unwrap();
        assert!(!ball_isomorphic(&a, &b).unwrap());
        let af = ball(&g, 1, 1, IdMode::IdFree).unwrap();
        let bf = ball(&g, 3, 1, IdMode::IdFree).unwrap();
        assert!(ball_isomorphic(&af, &bf).unwrap());
    }

    #[test]
    fn orientations_matter_for_isomorphism() {
        let mut b1 = GraphBuilder::new(3);
        b1.add_edge(0, 1, "p", Orientation::Forward).unwrap();
        b1.add_edge(1, 2, "p", Orientation::Forward).unwrap();
        let g1 = b1.build().unwrap();
        let mut b2 = GraphBuilder::new(3);
        b2.add_edge(0, 1, "p", Orientation::Forward).unwrap();
        b2.add_edge(1, 2, "p", Orientation::Backward).unwrap();
        let g2 = b2.build().unwrap();
        let x = ball(&g1, 1, 1, IdMode::IdFree).unwrap();
        let y = ball(&g2, 1, 1, IdMode::IdFree).unwrap();
        assert!(!ball_isomorphic(&x, &y).unwrap());
    }

    #[test]
    fn sub_ball_matches_direct_ball() {
        let t = generate_t(3, 3).unwrap();
        let g = t.graph();
        let big = ball(g, 5, 3, IdMode::IdFree).unwrap();
        // find a node at distance 1 in the big ball and rebase
        let v_local = (0..big.len()).find(|&v| big.dist[v] == 1).unwrap();
        let sub = big.sub_ball(v_local, 2);
        // identify the original id of v_local by distances: re-derive via ids
        let big_ids = ball(g, 5, 3, IdMode::WithIds).unwrap();
        let orig = big_ids.ids[v_local].unwrap() as usize;
        let direct = ball(g, orig, 2, IdMode::IdFree).unwrap();
        assert!(ball_isomorphic(&sub, &direct).unwrap());
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let t = generate_t(2, 4).unwrap();
        let mut b = GraphBuilder::new(t.n());
        for v in 0..t.n() {
            b.set_input(v, if v % 2 == 0 { "P" } else { "M" }).unwrap();
        }
        for e in t.graph().edges() {
            b.add_edge(e.a, e.b, "t", Orientation::Backward).unwrap();
        }
        let g = b.build().unwrap();
        let text = g.to_text();
        let parsed = Graph::from_text(&text).unwrap();
        assert_eq!(parsed.to_text(), text);
    }

    #[test]
    fn parse_reports_location() {
        let err = Graph::from_text("graph 2 1\nnode 0 a\nedge 0 5 - -\n").unwrap_err();
        match err {
            ParseError::Graph { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn rooted_tree_rejects_non_trees() {
        assert_eq!(RootedTree::new(Graph::cycle(4), 0).unwrap_err(), TreeError::NotATree);
        let disconnected = Graph::from_plain_edges(4, &[(0, 1), (2, 3)]);
        assert_eq!(RootedTree::new(disconnected, 0).unwrap_err(), TreeError::NotATree);
    }

    #[test]
    fn rooted_tree_parent_child_relation() {
        let t = generate_t(2, 3).unwrap();
        assert_eq!(t.parent(t.root()), None);
        let sizes = t.subtree_sizes();
        assert_eq!(sizes[t.root()], t.n());
        for v in 0..t.n() {
            for &c in t.children(v) {
                assert_eq!(t.parent(c), Some(v));
            }
        }
    }
}
