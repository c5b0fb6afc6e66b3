//! The machine-to-LCL construction: instance builder, the locally checkable
//! rule catalog, the derived LCL problem, its solving algorithm, and
//! lower-bound certificates.
//!
//! An instance consists of a directed spine path, an exponentiation tree
//! whose layers are chained into colored paths, and a simulation grid glued
//! to the spine along its bottom row. Every requirement on that shape is a
//! rule checkable within radius 2 of some center; `catalog.md` lists the
//! rules by id. Outputs either carry error pointers along directed edges
//! toward the spine head, or fill the grid with a step-by-step run of the
//! machine where the excuse label `*` absorbs broken structure, excused
//! predecessors, and acceptance.

use crate::graph::{
    ball, ball_with, Ball, Graph, GraphBuilder, IdMode, NodeId, Orientation, RelDir,
};
use crate::local::{Decision, LclProblem, LocalAlgorithm};
use crate::par;
use crate::turing::{run_unary, RunError, StateId, SymId, TuringMachine, BOT_L, BOT_R};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

// ----- tokens -----

pub const ROLE_P: &str = "P";
pub const ROLE_M: &str = "M";

pub const ET_SPINE: &str = "p";
pub const ET_CONN: &str = "c";
pub const ET_TREE: &str = "t";
pub const ET_LAYER: &str = "l";
pub const ET_VERT: &str = "v";
pub const ET_HORIZ: &str = "h";
pub const ET_GLUE: &str = "m";

pub const OUT_STAR: &str = "*";
pub const OUT_ERR_NONE: &str = "e:-";

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EKind {
    Top,
    Mid,
    Bot,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Role {
    Spine,
    Expo { tier: u8, kind: EKind, color: u8 },
    Grid,
    Unknown,
}

pub fn expo_token(tier: u8, kind: EKind, color: u8) -> String {
    let k = match kind {
        EKind::Top => 'T',
        EKind::Mid => 'M',
        EKind::Bot => 'B',
    };
    format!("E{tier}{k}{color}")
}

pub fn parse_role(token: &str) -> Role {
    match token {
        ROLE_P => Role::Spine,
        ROLE_M => Role::Grid,
        _ => {
            let b = token.as_bytes();
            if b.len() == 4 && b[0] == b'E' {
                let tier = match b[1] {
                    b'1' => 1,
                    b'2' => 2,
                    _ => return Role::Unknown,
                };
                let kind = match b[2] {
                    b'T' => EKind::Top,
                    b'M' => EKind::Mid,
                    b'B' => EKind::Bot,
                    _ => return Role::Unknown,
                };
                let color = match b[3] {
                    b'1' => 1,
                    b'2' => 2,
                    _ => return Role::Unknown,
                };
                Role::Expo { tier, kind, color }
            } else {
                Role::Unknown
            }
        }
    }
}

// ----- instance builder -----

/// A built instance with its coordinate tables. `grid[r][c]` is the node in
/// grid row r+1 (row 1 touches the spine) and column c+1 (column 1 under the
/// spine head).
#[derive(Clone, Debug)]
pub struct ConstructionInstance {
    pub graph: Graph,
    pub s: usize,
    pub height: usize,
    pub doubly: bool,
    pub spine: Vec<NodeId>,
    pub tier1: Vec<Vec<NodeId>>,
    pub tier2: Option<Vec<Vec<NodeId>>>,
    grid: Vec<Vec<NodeId>>,
}

impl ConstructionInstance {
    /// Grid node at 1-based (row, col).
    pub fn grid_node(&self, row: usize, col: usize) -> NodeId {
        self.grid[row - 1][col - 1]
    }

    pub fn count_spine(&self) -> usize {
        self.spine.len()
    }

    pub fn count_expo(&self) -> usize {
        self.tier1.iter().map(Vec::len).sum::<usize>()
            + self.tier2.as_ref().map_or(0, |t| t.iter().map(Vec::len).sum())
    }

    pub fn count_grid(&self) -> usize {
        self.grid.iter().map(Vec::len).sum()
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum BuildError {
    #[error("spine length must be at least 3 (got {0})")]
    SpineTooShort(usize),
    #[error("grid height must be at least 1")]
    NoGrid,
    #[error("machine timed out while sizing the instance: {0}")]
    MachineTimeout(String),
    #[error("machine lacks the unary input symbol 0")]
    MachineLacksZero,
}

struct TierLayout {
    layers: Vec<Vec<NodeId>>,
}

/// Allocate one exponentiation tree of `layers` layers over the anchor path
/// `anchors` (layer i's path head attaches to anchors[i-1]).
fn build_tier(
    b: &mut GraphBuilder,
    next: &mut NodeId,
    tier: u8,
    layers: usize,
    anchors: &[NodeId],
) -> TierLayout {
    assert_eq!(anchors.len(), layers);
    let mut ids: Vec<Vec<NodeId>> = Vec::with_capacity(layers);
    for i in 1..=layers {
        let width = 1usize << (i - 1);
        let mut row = Vec::with_capacity(width);
        for j in 1..=width {
            let v = *next;
            *next += 1;
            let kind = if i == 1 {
                EKind::Top
            } else if i == layers {
                EKind::Bot
            } else {
                EKind::Mid
            };
            let color = if j % 2 == 1 { 1 } else { 2 };
            b.set_input(v, &expo_token(tier, kind, color)).unwrap();
            row.push(v);
        }
        ids.push(row);
    }
    for i in 0..layers {
        // layer path, directed toward the head
        for j in 1..ids[i].len() {
            b.add_edge(ids[i][j], ids[i][j - 1], ET_LAYER, Orientation::Forward).unwrap();
        }
        // tree edges toward the parent
        if i + 1 < layers {
            for j in 0..ids[i + 1].len() {
                b.add_edge(ids[i + 1][j], ids[i][j / 2], ET_TREE, Orientation::Forward).unwrap();
            }
        }
        // head of each layer path attaches to its anchor
        b.add_edge(ids[i][0], anchors[i], ET_CONN, Orientation::Forward).unwrap();
    }
    TierLayout { layers: ids }
}

/// Build a fully rule-compliant instance: spine of length `s`, the
/// exponentiation tree (tiered twice when `doubly`), and an `s` x `height`
/// grid glued to the spine.
pub fn build_instance(
    s: usize,
    height: usize,
    doubly: bool,
) -> Result<ConstructionInstance, BuildError> {
    if s < 3 {
        return Err(BuildError::SpineTooShort(s));
    }
    if height < 1 {
        return Err(BuildError::NoGrid);
    }
    let tier1_count = (1usize << s) - 1;
    let tier2_layers = 1usize << (s - 1);
    let tier2_count = if doubly { (1usize << tier2_layers) - 1 } else { 0 };
    let n = s + tier1_count + tier2_count + s * height;
    let mut b = GraphBuilder::new(n);
    let mut next: NodeId = 0;

    let spine: Vec<NodeId> = (0..s)
        .map(|_| {
            let v = next;
            next += 1;
            b.set_input(v, ROLE_P).unwrap();
            v
        })
        .collect();
    for i in 1..s {
        b.add_edge(spine[i], spine[i - 1], ET_SPINE, Orientation::Forward).unwrap();
    }

    let tier1 = build_tier(&mut b, &mut next, 1, s, &spine);
    let tier2 = if doubly {
        let anchors = tier1.layers[s - 1].clone();
        Some(build_tier(&mut b, &mut next, 2, tier2_layers, &anchors))
    } else {
        None
    };

    let mut grid: Vec<Vec<NodeId>> = Vec::with_capacity(height);
    for _ in 0..height {
        let mut row = Vec::with_capacity(s);
        for _ in 0..s {
            let v = next;
            next += 1;
            b.set_input(v, ROLE_M).unwrap();
            row.push(v);
        }
        grid.push(row);
    }
    for r in 0..height {
        for c in 0..s {
            if c + 1 < s {
                b.add_edge(grid[r][c], grid[r][c + 1], ET_HORIZ, Orientation::Forward).unwrap();
            }
            if r + 1 < height {
                b.add_edge(grid[r][c], grid[r + 1][c], ET_VERT, Orientation::Forward).unwrap();
            }
        }
    }
    for c in 0..s {
        b.add_edge(spine[c], grid[0][c], ET_GLUE, Orientation::None).unwrap();
    }

    assert_eq!(next, n);
    Ok(ConstructionInstance {
        graph: b.build().expect("construction is simple and degree-bounded"),
        s,
        height,
        doubly,
        spine,
        tier1: tier1.layers,
        tier2: tier2.map(|t| t.layers),
        grid,
    })
}

// ----- structure rules -----

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleViolation {
    pub node: NodeId,
    pub rule_id: &'static str,
    pub description: String,
}

fn edges_of(view: &Ball, x: usize, ty: &str, dir: RelDir) -> Vec<usize> {
    view.neighbors(x)
        .iter()
        .filter(|e| e.etype == ty && e.dir == dir)
        .map(|e| e.to)
        .collect()
}

fn outs(view: &Ball, x: usize, ty: &str) -> Vec<usize> {
    edges_of(view, x, ty, RelDir::Out)
}

fn ins(view: &Ball, x: usize, ty: &str) -> Vec<usize> {
    edges_of(view, x, ty, RelDir::In)
}

fn unds(view: &Ball, x: usize, ty: &str) -> Vec<usize> {
    edges_of(view, x, ty, RelDir::Undirected)
}

fn role_at(view: &Ball, x: usize) -> Role {
    parse_role(&view.input[x])
}

/// Structure rules evaluated at the center of a radius-2 view. Each returned
/// pair is a violated rule id plus a short description.
fn structure_violations(view: &Ball, doubly: bool) -> Vec<(&'static str, String)> {
    let c = view.center;
    let mut viol: Vec<(&'static str, String)> = Vec::new();
    macro_rules! bad {
        ($id:expr, $d:expr $(,)?) => {
            viol.push(($id, $d))
        };
    }

    let role = role_at(view, c);
    if role == Role::Unknown {
        return vec![("role", format!("unknown input token {:?}", view.input[c]))];
    }

    // edge typing at this endpoint
    for e in view.neighbors(c) {
        let other = role_at(view, e.to);
        let ok = match (e.etype.as_str(), role, other) {
            (ET_SPINE, Role::Spine, Role::Spine) => e.dir != RelDir::Undirected,
            (ET_CONN, Role::Expo { tier: 1, .. }, Role::Spine) => e.dir == RelDir::Out,
            (ET_CONN, Role::Spine, Role::Expo { tier: 1, .. }) => e.dir == RelDir::In,
            (ET_CONN, Role::Expo { tier: 2, .. }, Role::Expo { tier: 1, kind: EKind::Bot, .. }) => {
                e.dir == RelDir::Out
            }
            (
                ET_CONN,
                Role::Expo { tier: 1, kind: EKind::Bot, .. },
                Role::Expo { tier: 2, .. },
            ) => e.dir == RelDir::In,
            (ET_TREE | ET_LAYER, Role::Expo { tier: a, .. }, Role::Expo { tier: b, .. }) => {
                a == b && e.dir != RelDir::Undirected
            }
            (ET_VERT | ET_HORIZ, Role::Grid, Role::Grid) => e.dir != RelDir::Undirected,
            (ET_GLUE, Role::Spine, Role::Grid) | (ET_GLUE, Role::Grid, Role::Spine) => {
                e.dir == RelDir::Undirected
            }
            _ => false,
        };
        if !ok {
            bad!("edge-typing", format!("edge of type {:?} not allowed here", e.etype));
        }
    }
    if !viol.is_empty() {
        // degree and linkage rules assume well-typed incident edges
        return viol;
    }

    match role {
        Role::Spine => {
            let pouts = outs(view, c, ET_SPINE);
            let pins = ins(view, c, ET_SPINE);
            if pouts.len() > 1 || pins.len() > 1 {
                bad!("p-degree", "spine node with multiple in or out spine edges".into());
            }
            if pouts.is_empty() {
                // spine head: the component must have length at least 3
                match pins.first() {
                    Some(&w) if !ins(view, w, ET_SPINE).is_empty() => {}
                    _ => bad!("p-spine", "spine component shorter than 3".into()),
                }
            }
            let cins = ins(view, c, ET_CONN);
            if cins.len() != 1 {
                bad!("p-conn", format!("expected one incoming connector, found {}", cins.len()));
            } else {
                let w = cins[0];
                if !outs(view, w, ET_LAYER).is_empty() {
                    bad!("p-conn", "connector source is not a layer-path head".into());
                }
                if let Role::Expo { kind, .. } = role_at(view, w) {
                    let want = match (pouts.is_empty(), pins.is_empty()) {
                        (true, false) => Some(EKind::Top),
                        (false, true) => Some(EKind::Bot),
                        (false, false) => Some(EKind::Mid),
                        (true, true) => None,
                    };
                    if want != Some(kind) {
                        bad!("p-conn-kind", "connector kind does not match spine position".into());
                    }
                }
            }
            for &u in &pouts {
                let wu = ins(view, u, ET_CONN);
                if let (Some(&w), Some(&x)) = (wu.first(), cins.first()) {
                    if wu.len() == 1 && !outs(view, x, ET_TREE).contains(&w) {
                        bad!(
                            "p-tree-link",
                            "consecutive spine nodes without a matching tree edge".into(),
                        );
                    }
                }
            }
            let glue = unds(view, c, ET_GLUE);
            if glue.len() != 1 {
                bad!("p-grid", format!("expected one grid edge, found {}", glue.len()));
            } else {
                let u = glue[0];
                let down0 = ins(view, u, ET_VERT).is_empty();
                let left0 = ins(view, u, ET_HORIZ).is_empty();
                let right0 = outs(view, u, ET_HORIZ).is_empty();
                if !down0 || left0 != pouts.is_empty() || right0 != pins.is_empty() {
                    bad!("p-grid", "grid partner is not at the matching bottom position".into());
                }
                for &pu in &pouts {
                    let gu = unds(view, pu, ET_GLUE);
                    if let Some(&w) = gu.first() {
                        if gu.len() == 1 && !outs(view, w, ET_HORIZ).contains(&u) {
                            bad!(
                                "p-grid-link",
                                "grid partners of consecutive spine nodes not adjacent".into(),
                            );
                        }
                    }
                }
            }
        }
        Role::Expo { tier, kind, color } => {
            if tier == 2 && !doubly {
                bad!("tier", "second-tier node in a single-tier problem".into());
            }
            let tins = ins(view, c, ET_TREE);
            let touts = outs(view, c, ET_TREE);
            let (want_in, want_out) = match kind {
                EKind::Top => (2, 0),
                EKind::Mid => (2, 1),
                EKind::Bot => (0, 1),
            };
            if tins.len() != want_in || touts.len() != want_out {
                bad!("e-tree", format!("tree degree ({}, {}) off", tins.len(), touts.len()));
            }
            let louts = outs(view, c, ET_LAYER);
            let lins = ins(view, c, ET_LAYER);
            match kind {
                EKind::Top => {
                    if !louts.is_empty() || !lins.is_empty() {
                        bad!("e-path", "top node with layer-path edges".into());
                    }
                }
                _ => {
                    let total = louts.len() + lins.len();
                    if !(1..=2).contains(&total) || louts.len() > 1 || lins.len() > 1 {
                        bad!("e-path", "layer-path degree must be one or two, split in/out".into());
                    }
                }
            }
            // proper 2-coloring with pinned endpoints
            for e in view.neighbors(c) {
                if e.etype == ET_LAYER {
                    if let Role::Expo { color: oc, .. } = role_at(view, e.to) {
                        if oc == color {
                            bad!("e-color", "layer-path neighbors share a color".into());
                        }
                    }
                }
            }
            let want_color = if louts.is_empty() && lins.len() == 1 {
                Some(1)
            } else if lins.is_empty() && louts.len() == 1 {
                Some(2)
            } else if lins.is_empty() && louts.is_empty() {
                Some(1)
            } else {
                None
            };
            if let Some(w) = want_color {
                if color != w {
                    bad!("e-color", "endpoint color is pinned by the path direction".into());
                }
            }
            for &u in &louts {
                if let Role::Expo { color: cu, .. } = role_at(view, u) {
                    if cu == 1 && color == 2 {
                        // siblings share a parent
                        let pu = outs(view, u, ET_TREE);
                        let pc = outs(view, c, ET_TREE);
                        if pu.len() != 1 || pc.len() != 1 || pu[0] != pc[0] {
                            bad!("e-sibling", "color 1 <- 2 layer pair without shared parent".into());
                        }
                    } else if cu == 2 && color == 1 {
                        // cousins: parents joined by a layer edge
                        let pu = outs(view, u, ET_TREE);
                        let pc = outs(view, c, ET_TREE);
                        match (pu.first(), pc.first()) {
                            (Some(&w), Some(&x)) if outs(view, x, ET_LAYER).contains(&w) => {}
                            _ => bad!(
                                "e-cousin",
                                "color 2 <- 1 layer pair without linked parents".into(),
                            ),
                        }
                    }
                }
            }
            if tins.len() == 2 {
                let (a, b2) = (tins[0], tins[1]);
                let ca = match role_at(view, a) {
                    Role::Expo { color, .. } => color,
                    _ => 0,
                };
                let cb = match role_at(view, b2) {
                    Role::Expo { color, .. } => color,
                    _ => 0,
                };
                if ca + cb != 3 {
                    bad!("e-sibling-conv", "children are not colored 1 and 2".into());
                } else {
                    let (u1, u2) = if ca == 1 { (a, b2) } else { (b2, a) };
                    if !outs(view, u2, ET_LAYER).contains(&u1) {
                        bad!("e-sibling-conv", "children not joined by a layer edge".into());
                    }
                    // endpoint alignment with the parent
                    if louts.is_empty() != outs(view, u1, ET_LAYER).is_empty() {
                        bad!("e-endpoint", "head alignment with color-1 child broken".into());
                    }
                    if lins.is_empty() != ins(view, u2, ET_LAYER).is_empty() {
                        bad!("e-endpoint", "tail alignment with color-2 child broken".into());
                    }
                }
            }
            // cousin rule, converse direction
            for &w in &louts {
                let wk = ins(view, w, ET_TREE);
                if tins.len() == 2 && wk.len() == 2 {
                    let my1 = tins
                        .iter()
                        .copied()
                        .find(|&x| matches!(role_at(view, x), Role::Expo { color: 1, .. }));
                    let their2 = wk
                        .iter()
                        .copied()
                        .find(|&x| matches!(role_at(view, x), Role::Expo { color: 2, .. }));
                    if let (Some(v1), Some(u2)) = (my1, their2) {
                        if !outs(view, v1, ET_LAYER).contains(&u2) {
                            bad!("e-cousin-conv", "children of linked parents not linked".into());
                        }
                    }
                }
            }
            let couts = outs(view, c, ET_CONN);
            if (couts.len() == 1) != louts.is_empty() || couts.len() > 1 {
                bad!("e-conn", "connector present iff the node heads its layer path".into());
            }
            if let Some(&u) = couts.first() {
                let (u_no_out, u_no_in) = match role_at(view, u) {
                    Role::Spine => {
                        (outs(view, u, ET_SPINE).is_empty(), ins(view, u, ET_SPINE).is_empty())
                    }
                    Role::Expo { .. } => {
                        (outs(view, u, ET_LAYER).is_empty(), ins(view, u, ET_LAYER).is_empty())
                    }
                    _ => (false, false),
                };
                let want = match (u_no_out, u_no_in) {
                    (true, false) => Some(EKind::Top),
                    (false, true) => Some(EKind::Bot),
                    (false, false) => Some(EKind::Mid),
                    (true, true) => None,
                };
                if want != Some(kind) {
                    bad!("e-conn-kind", "connector kind does not match anchor position".into());
                }
            }
            // second-tier attachment of first-tier bottom nodes
            if tier == 1 && kind == EKind::Bot {
                let cins = ins(view, c, ET_CONN);
                if doubly {
                    if cins.len() != 1 {
                        bad!("e1b-conn", format!("expected one tier-2 connector, found {}", cins.len()));
                    } else if !outs(view, cins[0], ET_LAYER).is_empty() {
                        bad!("e1b-conn", "tier-2 connector source is not a head".into());
                    }
                    for &u in &louts {
                        let wu = ins(view, u, ET_CONN);
                        if let (Some(&w), Some(&x)) = (wu.first(), cins.first()) {
                            if wu.len() == 1
                                && cins.len() == 1
                                && !outs(view, x, ET_TREE).contains(&w)
                            {
                                bad!(
                                    "e1b-tree-link",
                                    "consecutive anchors without a matching tier-2 tree edge"
                                        .into(),
                                );
                            }
                        }
                    }
                } else if !cins.is_empty() {
                    bad!("e1b-conn", "tier-2 connector in a single-tier problem".into());
                }
            }
        }
        Role::Grid => {
            let up = outs(view, c, ET_VERT);
            let down = ins(view, c, ET_VERT);
            let left = ins(view, c, ET_HORIZ);
            let right = outs(view, c, ET_HORIZ);
            if up.len() > 1 || down.len() > 1 || left.len() > 1 || right.len() > 1 {
                bad!("m-degree", "grid direction used twice".into());
            } else if left.is_empty() && right.is_empty() {
                bad!("m-degree", "grid node with no horizontal edges".into());
            }
            let face = |a: Option<&usize>, b2: Option<&usize>, pick_a: &dyn Fn(usize) -> Vec<usize>, pick_b: &dyn Fn(usize) -> Vec<usize>| -> bool {
                match (a, b2) {
                    (Some(&x), Some(&y)) => {
                        let fa = pick_a(x);
                        let fb = pick_b(y);
                        fa.len() == 1 && fb.len() == 1 && fa[0] == fb[0]
                    }
                    _ => true,
                }
            };
            if !face(up.first(), left.first(), &|x| ins(view, x, ET_HORIZ), &|y| {
                outs(view, y, ET_VERT)
            }) {
                bad!("m-face-ul", "up-left face does not close".into());
            }
            if !face(up.first(), right.first(), &|x| outs(view, x, ET_HORIZ), &|y| {
                outs(view, y, ET_VERT)
            }) {
                bad!("m-face-ur", "up-right face does not close".into());
            }
            if !face(down.first(), left.first(), &|x| ins(view, x, ET_HORIZ), &|y| {
                ins(view, y, ET_VERT)
            }) {
                bad!("m-face-dl", "down-left face does not close".into());
            }
            if !face(down.first(), right.first(), &|x| outs(view, x, ET_HORIZ), &|y| {
                ins(view, y, ET_VERT)
            }) {
                bad!("m-face-dr", "down-right face does not close".into());
            }
            let glue = unds(view, c, ET_GLUE);
            if (glue.len() == 1) != down.is_empty() || glue.len() > 1 {
                bad!("m-conn", "spine attachment present iff on the bottom row".into());
            }
        }
        Role::Unknown => unreachable!(),
    }
    viol
}

/// Check the whole catalog at every node. Accepts arbitrary labeled graphs;
/// on a clean instance the result is empty.
pub fn check_rules(g: &Graph, doubly: bool) -> Vec<RuleViolation> {
    let per_node: Vec<Vec<RuleViolation>> = par::map_indexed(g.n(), |v| {
        let view = ball(g, v, 2, IdMode::IdFree).expect("node in graph");
        structure_violations(&view, doubly)
            .into_iter()
            .map(|(rule_id, description)| RuleViolation { node: v, rule_id, description })
            .collect()
    });
    per_node.into_iter().flatten().collect()
}

/// True iff some rule is violated at a center within distance 1 of `x` in
/// this view. Requires `dist[x] + 3 <= view.radius`.
fn violation_within_1(view: &Ball, x: usize, doubly: bool) -> bool {
    let mut centers = vec![x];
    centers.extend(view.neighbors(x).iter().map(|e| e.to));
    centers.into_iter().any(|y| {
        let sub = view.sub_ball(y, 2);
        !structure_violations(&sub, doubly).is_empty()
    })
}

// ----- outputs -----

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MOut {
    Star,
    Cell { sym: SymId, head: Option<StateId> },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum ParsedOut {
    Err(Option<EdgeKind>),
    M(MOut),
    Bad,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EdgeKind {
    Spine,
    Conn,
    Tree,
    Layer,
}

impl EdgeKind {
    fn token(self) -> &'static str {
        match self {
            EdgeKind::Spine => ET_SPINE,
            EdgeKind::Conn => ET_CONN,
            EdgeKind::Tree => ET_TREE,
            EdgeKind::Layer => ET_LAYER,
        }
    }

    fn from_type(t: &str) -> Option<Self> {
        match t {
            ET_SPINE => Some(EdgeKind::Spine),
            ET_CONN => Some(EdgeKind::Conn),
            ET_TREE => Some(EdgeKind::Tree),
            ET_LAYER => Some(EdgeKind::Layer),
            _ => None,
        }
    }
}

pub fn err_token(kind: Option<EdgeKind>) -> String {
    match kind {
        None => OUT_ERR_NONE.to_string(),
        Some(k) => format!("e:{}", k.token()),
    }
}

pub fn cell_token(m: &TuringMachine, sym: SymId, head: Option<StateId>) -> String {
    match head {
        None => format!("c:{}:-", m.sym_token(sym)),
        Some(q) => format!("c:{}:{}", m.sym_token(sym), m.state_token(q)),
    }
}

fn m_out_token(m: &TuringMachine, out: MOut) -> String {
    match out {
        MOut::Star => OUT_STAR.to_string(),
        MOut::Cell { sym, head } => cell_token(m, sym, head),
    }
}

fn parse_output(m: &TuringMachine, token: &str) -> ParsedOut {
    if token == OUT_STAR {
        return ParsedOut::M(MOut::Star);
    }
    if token == OUT_ERR_NONE {
        return ParsedOut::Err(None);
    }
    if let Some(rest) = token.strip_prefix("e:") {
        return match EdgeKind::from_type(rest) {
            Some(k) => ParsedOut::Err(Some(k)),
            None => ParsedOut::Bad,
        };
    }
    if let Some(rest) = token.strip_prefix("c:") {
        let mut it = rest.splitn(2, ':');
        let sym = it.next().and_then(|t| m.sym_id(t));
        let head = match it.next() {
            Some("-") => Some(None),
            Some(q) => m.state_id(q).map(Some),
            None => None,
        };
        return match (sym, head) {
            (Some(sym), Some(head)) => ParsedOut::M(MOut::Cell { sym, head }),
            _ => ParsedOut::Bad,
        };
    }
    ParsedOut::Bad
}

/// The output alphabet for a given machine: error pointers, the excuse label,
/// and every cell content with an optional head marker.
pub fn sigma_out(m: &TuringMachine) -> Vec<String> {
    let mut out = vec![
        OUT_ERR_NONE.to_string(),
        err_token(Some(EdgeKind::Spine)),
        err_token(Some(EdgeKind::Conn)),
        err_token(Some(EdgeKind::Tree)),
        err_token(Some(EdgeKind::Layer)),
        OUT_STAR.to_string(),
    ];
    for sym in 0..m.alphabet().len() {
        out.push(cell_token(m, sym, None));
        for q in 0..m.states().len() {
            out.push(cell_token(m, sym, Some(q)));
        }
    }
    out
}

pub fn sigma_in() -> Vec<String> {
    let mut v = vec![ROLE_P.to_string(), ROLE_M.to_string()];
    for tier in [1, 2] {
        for kind in [EKind::Top, EKind::Mid, EKind::Bot] {
            for color in [1, 2] {
                v.push(expo_token(tier, kind, color));
            }
        }
    }
    v
}

// ----- shared transition semantics -----

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum NextCell {
    Value(SymId, Option<StateId>),
    Ambiguous,
}

/// One grid step: the new content of a cell from the three cells below it.
/// Missing sides are grid borders. Two heads arriving at once (possible only
/// off the intended structure) yields Ambiguous.
fn next_cell(
    m: &TuringMachine,
    left: Option<(SymId, Option<StateId>)>,
    mid: (SymId, Option<StateId>),
    right: Option<(SymId, Option<StateId>)>,
) -> NextCell {
    let step = |cell: (SymId, Option<StateId>)| -> Option<crate::turing::Transition> {
        cell.1.and_then(|q| m.transition(q, cell.0))
    };
    // an accepting head below has no transition; nothing can be computed
    if let Some(q) = mid.1 {
        if m.is_accepting(q) {
            return NextCell::Ambiguous;
        }
    }
    for side in [left, right].into_iter().flatten() {
        if let Some(q) = side.1 {
            if m.is_accepting(q) {
                return NextCell::Ambiguous;
            }
        }
    }
    let new_sym = match step(mid) {
        Some(t) => t.write,
        None => mid.0,
    };
    let mut arrivals: Vec<StateId> = Vec::new();
    if let Some(l) = left {
        if let Some(t) = step(l) {
            if t.dir == crate::turing::Dir::R {
                arrivals.push(t.state);
            }
        }
    }
    if let Some(r) = right {
        if let Some(t) = step(r) {
            if t.dir == crate::turing::Dir::L {
                arrivals.push(t.state);
            }
        }
    }
    match arrivals.len() {
        0 => NextCell::Value(new_sym, None),
        1 => NextCell::Value(new_sym, Some(arrivals[0])),
        _ => NextCell::Ambiguous,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum GridCase {
    CornerHead { err_in: bool },
    Border { left: Option<MOut> },
    CornerTail { left: Option<MOut> },
    Interior { deps: [Option<Option<MOut>>; 3] },
}

/// The allowed outputs of a grid node in each structural case, given the
/// resolved outputs it depends on. `None` in a dependency slot means the
/// dependent node exists but carries a malformed output; the affected node
/// may then excuse itself.
fn grid_allowed(m: &TuringMachine, case: &GridCase) -> Vec<MOut> {
    let zero = m.sym_id("0").expect("machine has the unary input symbol");
    match case {
        GridCase::CornerHead { err_in } => {
            if *err_in {
                vec![MOut::Star]
            } else {
                vec![MOut::Cell { sym: BOT_L, head: Some(m.initial()) }]
            }
        }
        GridCase::Border { left } => match left {
            Some(MOut::Star) | None => vec![MOut::Star],
            Some(MOut::Cell { .. }) => vec![MOut::Cell { sym: zero, head: None }],
        },
        GridCase::CornerTail { left } => match left {
            Some(MOut::Star) | None => vec![MOut::Star],
            Some(MOut::Cell { .. }) => vec![MOut::Cell { sym: BOT_R, head: None }],
        },
        GridCase::Interior { deps } => {
            let [left, mid, right] = deps;
            let mid = match mid {
                Some(Some(v)) => *v,
                // the down neighbor always exists in this case; a malformed
                // output there excuses this node
                _ => return vec![MOut::Star],
            };
            let unpack = |d: &Option<Option<MOut>>| -> Result<Option<(SymId, Option<StateId>)>, ()> {
                match d {
                    None => Ok(None),
                    Some(Some(MOut::Cell { sym, head })) => Ok(Some((*sym, *head))),
                    Some(Some(MOut::Star)) | Some(None) => Err(()),
                }
            };
            let (l, r) = match (unpack(left), unpack(right)) {
                (Ok(l), Ok(r)) => (l, r),
                _ => return vec![MOut::Star],
            };
            let mid_cell = match mid {
                MOut::Cell { sym, head } => (sym, head),
                MOut::Star => return vec![MOut::Star],
            };
            match next_cell(m, l, mid_cell, r) {
                NextCell::Ambiguous => vec![MOut::Star],
                NextCell::Value(sym, head) => {
                    if head.map_or(false, |q| m.is_accepting(q)) {
                        vec![MOut::Star]
                    } else {
                        vec![MOut::Cell { sym, head }]
                    }
                }
            }
        }
    }
}

/// Classify a grid center whose local structure is intact and resolve its
/// dependencies from a decorated view. A dependency slot comes back as
/// `Some(None)` when the node exists but its output is missing or malformed.
fn grid_case_from_view(m: &TuringMachine, view: &Ball, c: usize) -> GridCase {
    let parse = |x: usize| -> Option<Option<MOut>> {
        Some(match view.output[x].as_deref() {
            None => None,
            Some(t) => match parse_output(m, t) {
                ParsedOut::M(v) => Some(v),
                _ => None,
            },
        })
    };
    let down = ins(view, c, ET_VERT);
    if down.is_empty() {
        let left = ins(view, c, ET_HORIZ);
        if left.is_empty() {
            // head corner: consult error pointers aimed at the spine partner
            let u = unds(view, c, ET_GLUE)[0];
            let mut err_in = false;
            for e in view.neighbors(u) {
                if e.dir == RelDir::In {
                    if let Some(k) = EdgeKind::from_type(&e.etype) {
                        if let Some(t) = view.output[e.to].as_deref() {
                            if parse_output(m, t) == ParsedOut::Err(Some(k)) {
                                err_in = true;
                            }
                        }
                    }
                }
            }
            GridCase::CornerHead { err_in }
        } else {
            let lv = parse(left[0]).unwrap();
            if outs(view, c, ET_HORIZ).is_empty() {
                GridCase::CornerTail { left: lv }
            } else {
                GridCase::Border { left: lv }
            }
        }
    } else {
        let w = down[0];
        let wl = ins(view, w, ET_HORIZ).first().copied();
        let wr = outs(view, w, ET_HORIZ).first().copied();
        GridCase::Interior {
            deps: [wl.map(|x| parse(x).unwrap()), Some(parse(w).unwrap()), wr.map(|x| parse(x).unwrap())],
        }
    }
}

// ----- the LCL problem -----

/// The LCL problem derived from a machine: a labeling is allowed when error
/// pointers are legitimate and the grid carries a step-by-step run (or is
/// excused cell by cell).
pub fn lcl_problem_of(m: &TuringMachine, doubly: bool) -> LclProblem {
    assert!(m.sym_id("0").is_some(), "machine must consume unary input over the symbol 0");
    let machine = m.clone();
    LclProblem::new(6, 3, sigma_in(), sigma_out(m), move |view| {
        lcl_center_ok(&machine, view, doubly)
    })
}

fn incoming_err_present(m: &TuringMachine, view: &Ball, x: usize) -> bool {
    view.neighbors(x).iter().any(|e| {
        e.dir == RelDir::In
            && EdgeKind::from_type(&e.etype).map_or(false, |k| {
                view.output[e.to]
                    .as_deref()
                    .map_or(false, |t| parse_output(m, t) == ParsedOut::Err(Some(k)))
            })
    })
}

fn lcl_center_ok(m: &TuringMachine, view: &Ball, doubly: bool) -> bool {
    let c = view.center;
    let Some(token) = view.output[c].as_deref() else { return false };
    let out = parse_output(m, token);
    match role_at(view, c) {
        Role::Unknown => true,
        Role::Spine | Role::Expo { .. } => match out {
            ParsedOut::Err(None) => true,
            ParsedOut::Err(Some(kind)) => {
                let has_edge = view
                    .neighbors(c)
                    .iter()
                    .any(|e| e.dir == RelDir::Out && e.etype == kind.token());
                has_edge
                    && (violation_within_1(view, c, doubly) || incoming_err_present(m, view, c))
            }
            _ => false,
        },
        Role::Grid => {
            let mine = match out {
                ParsedOut::M(v) => v,
                _ => return false,
            };
            if violation_within_1(view, c, doubly) {
                return true;
            }
            let case = grid_case_from_view(m, view, c);
            grid_allowed(m, &case).contains(&mine)
        }
    }
}

// ----- the solving algorithm -----

fn chain_next(view: &Ball, x: usize) -> Option<(usize, EdgeKind)> {
    for kind in [EdgeKind::Tree, EdgeKind::Conn, EdgeKind::Spine, EdgeKind::Layer] {
        let mut targets = outs(view, x, kind.token());
        if !targets.is_empty() {
            // deterministic across views: pick the smallest identifier
            targets.sort_by_key(|&t| view.ids[t]);
            return Some((targets[0], kind));
        }
    }
    None
}

fn emit_token(view: &Ball, c: usize) -> String {
    err_token(chain_next(view, c).map(|(_, k)| k))
}

/// Decide an error-pointer output for a spine or tree node: emit when next to
/// a violation or when an error pointer arrives, conclude `e:-` once the set
/// of nodes that could ever send one is fully inspected.
fn decide_pointer(m: &TuringMachine, view: &Ball, t: usize, n: usize, doubly: bool) -> Decision {
    let c = view.center;
    if t < 3 {
        return Decision::Wait;
    }
    if violation_within_1(view, c, doubly) {
        return Decision::Output(emit_token(view, c));
    }
    if incoming_err_present(m, view, c) {
        return Decision::Output(emit_token(view, c));
    }
    // reverse reachability along directed pointer-capable edges
    let mut reach = vec![false; view.len()];
    reach[c] = true;
    let mut stack = vec![c];
    let mut enclosed = true;
    let mut reached: Vec<usize> = vec![c];
    while let Some(x) = stack.pop() {
        if view.dist[x] + 3 > t {
            enclosed = false;
            break;
        }
        for e in view.neighbors(x) {
            if e.dir == RelDir::In
                && EdgeKind::from_type(&e.etype).is_some()
                && !reach[e.to]
            {
                reach[e.to] = true;
                reached.push(e.to);
                stack.push(e.to);
            }
        }
    }
    let give_up = |t: usize| {
        if t >= n + 4 {
            Decision::Output(OUT_ERR_NONE.into())
        } else {
            Decision::Wait
        }
    };
    if !enclosed {
        return give_up(t);
    }
    // only spine and tree nodes ever emit pointers
    let can_emit = |x: usize| matches!(role_at(view, x), Role::Spine | Role::Expo { .. });
    let sources: Vec<usize> = reached
        .iter()
        .copied()
        .filter(|&x| x != c && can_emit(x) && violation_within_1(view, x, doubly))
        .collect();
    if sources.is_empty() {
        return Decision::Output(OUT_ERR_NONE.into());
    }
    // a pointer chain follows chain_next hops through emitting nodes; it can
    // only reach this node while it stays inside the reverse-reachable set
    for &src in &sources {
        let mut seen = BTreeSet::new();
        let mut cur = src;
        loop {
            if !seen.insert(cur) {
                break;
            }
            match chain_next(view, cur) {
                Some((nxt, _)) => {
                    if nxt == c {
                        return give_up(t);
                    }
                    if !reach[nxt] || !can_emit(nxt) {
                        break;
                    }
                    cur = nxt;
                }
                None => break,
            }
        }
    }
    Decision::Output(OUT_ERR_NONE.into())
}

/// Recursively reconstruct the forced value of a grid node inside a view,
/// reading only structure, decided pointer outputs, and the first layer.
/// Returns None when the view does not yet determine the value.
fn grid_value(
    m: &TuringMachine,
    view: &Ball,
    x: usize,
    doubly: bool,
    memo: &mut HashMap<usize, Option<MOut>>,
    guard: &mut BTreeSet<usize>,
) -> Option<MOut> {
    if let Some(v) = memo.get(&x) {
        return *v;
    }
    if !guard.insert(x) {
        return None;
    }
    let result = (|| -> Option<MOut> {
        if view.dist[x] + 3 > view.radius {
            return None;
        }
        if role_at(view, x) != Role::Grid {
            return None;
        }
        if violation_within_1(view, x, doubly) {
            return Some(MOut::Star);
        }
        let down = ins(view, x, ET_VERT);
        if down.is_empty() {
            let left = ins(view, x, ET_HORIZ);
            if left.is_empty() {
                let u = unds(view, x, ET_GLUE)[0];
                // all pointer emitters aimed at the spine head must be decided
                let mut err_in = false;
                for e in view.neighbors(u) {
                    if e.dir == RelDir::In {
                        if let Some(k) = EdgeKind::from_type(&e.etype) {
                            match view.output[e.to].as_deref() {
                                None => return None,
                                Some(t) => {
                                    if parse_output(m, t) == ParsedOut::Err(Some(k)) {
                                        err_in = true;
                                    }
                                }
                            }
                        }
                    }
                }
                Some(grid_allowed(m, &GridCase::CornerHead { err_in })[0])
            } else {
                let lv = grid_value(m, view, left[0], doubly, memo, guard)?;
                let case = if outs(view, x, ET_HORIZ).is_empty() {
                    GridCase::CornerTail { left: Some(lv) }
                } else {
                    GridCase::Border { left: Some(lv) }
                };
                Some(grid_allowed(m, &case)[0])
            }
        } else {
            let w = down[0];
            let wv = grid_value(m, view, w, doubly, memo, guard)?;
            let wl = match ins(view, w, ET_HORIZ).first() {
                Some(&y) => Some(Some(grid_value(m, view, y, doubly, memo, guard)?)),
                None => None,
            };
            let wr = match outs(view, w, ET_HORIZ).first() {
                Some(&y) => Some(Some(grid_value(m, view, y, doubly, memo, guard)?)),
                None => None,
            };
            let case = GridCase::Interior { deps: [wl, Some(Some(wv)), wr] };
            Some(grid_allowed(m, &case)[0])
        }
    })();
    guard.remove(&x);
    memo.insert(x, result);
    result
}

/// The solving algorithm for the problem of `m`: spine and tree nodes run the
/// error scan and emit pointer chains; grid nodes reconstruct their forced
/// cell from the first layer upward, excusing themselves wherever structure
/// breaks, and fall back to the excuse label if nothing resolves.
pub fn solver(m: &TuringMachine, doubly: bool) -> LocalAlgorithm {
    assert!(m.sym_id("0").is_some(), "machine must consume unary input over the symbol 0");
    let machine = m.clone();
    LocalAlgorithm::new(6, None, move |ctx| {
        let view = ctx.view;
        let c = view.center;
        let t = ctx.round;
        let n = ctx.n;
        match parse_role(&view.input[c]) {
            Role::Unknown => Decision::Output(OUT_ERR_NONE.into()),
            Role::Spine | Role::Expo { .. } => decide_pointer(&machine, view, t, n, doubly),
            Role::Grid => {
                if t < 3 {
                    return Decision::Wait;
                }
                if violation_within_1(view, c, doubly) {
                    return Decision::Output(OUT_STAR.into());
                }
                let mut memo = HashMap::new();
                let mut guard = BTreeSet::new();
                match grid_value(&machine, view, c, doubly, &mut memo, &mut guard) {
                    Some(v) => Decision::Output(m_out_token(&machine, v)),
                    None => {
                        if t >= 2 * n + 8 {
                            Decision::Output(OUT_STAR.into())
                        } else {
                            Decision::Wait
                        }
                    }
                }
            }
        }
    })
}

// ----- mutations -----

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mutation {
    DropTreeEdge,
    RecolorLayerNode,
    BreakFace,
    ShortenSpine,
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum MutationError {
    #[error("mutation {0:?} is not applicable: {1}")]
    NotApplicable(Mutation, String),
}

/// A labeled graph differing from the instance by exactly the named mutation.
pub fn corrupt(inst: &ConstructionInstance, kind: Mutation) -> Result<Graph, MutationError> {
    let g = &inst.graph;
    match kind {
        Mutation::DropTreeEdge => {
            let child = inst.tier1[1][0];
            let parent = inst.tier1[0][0];
            let mut b = GraphBuilder::new(g.n());
            for v in 0..g.n() {
                b.set_input(v, g.input(v)).unwrap();
            }
            for e in g.edges() {
                if (e.a, e.b) != (child.min(parent), child.max(parent)) {
                    b.add_edge(e.a, e.b, &e.etype, e.orient).unwrap();
                }
            }
            Ok(b.build().unwrap())
        }
        Mutation::RecolorLayerNode => {
            let v = inst.tier1[inst.s - 1][1];
            let flipped = match parse_role(g.input(v)) {
                Role::Expo { tier, kind, color } => expo_token(tier, kind, 3 - color),
                _ => unreachable!("layer nodes carry tree-role tokens"),
            };
            let mut b = GraphBuilder::new(g.n());
            for u in 0..g.n() {
                b.set_input(u, if u == v { &flipped } else { g.input(u) }).unwrap();
            }
            for e in g.edges() {
                b.add_edge(e.a, e.b, &e.etype, e.orient).unwrap();
            }
            Ok(b.build().unwrap())
        }
        Mutation::BreakFace => {
            if inst.height < 2 {
                return Err(MutationError::NotApplicable(
                    kind,
                    "needs at least two grid rows".into(),
                ));
            }
            let a = inst.grid_node(1, 2);
            let bnode = inst.grid_node(2, 2);
            let mut b = GraphBuilder::new(g.n());
            for v in 0..g.n() {
                b.set_input(v, g.input(v)).unwrap();
            }
            for e in g.edges() {
                if (e.a, e.b) != (a.min(bnode), a.max(bnode)) {
                    b.add_edge(e.a, e.b, &e.etype, e.orient).unwrap();
                }
            }
            Ok(b.build().unwrap())
        }
        Mutation::ShortenSpine => {
            let drop = inst.spine[inst.s - 1];
            let keep: Vec<NodeId> = (0..g.n()).filter(|&v| v != drop).collect();
            let (sub, _) = g.induced(&keep);
            Ok(sub)
        }
    }
}

// ----- lower bound -----

#[derive(Error, Debug)]
pub enum LowerBoundError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("machine timed out under the step cap")]
    Timeout,
    #[error(transparent)]
    Run(RunError),
}

/// Size and acceptance data of a run used to shape lower-bound instances.
#[derive(Clone, Copy, Debug)]
pub struct AcceptanceData {
    pub steps: u64,
    /// 1-based grid column of the accepting head cell.
    pub accept_col: usize,
    /// 1-based grid row recording the accepting configuration.
    pub accept_row: usize,
}

pub fn acceptance_data(
    m: &TuringMachine,
    s: usize,
    step_cap: u64,
) -> Result<AcceptanceData, LowerBoundError> {
    if s < 3 {
        return Err(LowerBoundError::Build(BuildError::SpineTooShort(s)));
    }
    let out = run_unary(m, s - 2, step_cap).map_err(|e| match e {
        RunError::Timeout { .. } => LowerBoundError::Timeout,
        other => LowerBoundError::Run(other),
    })?;
    Ok(AcceptanceData {
        steps: out.steps,
        accept_col: out.config.head + 1,
        accept_row: out.steps as usize + 1,
    })
}

/// The fully valid instance whose grid is exactly twice as tall as the
/// machine's running time on the spine-derived input.
pub fn build_lower_bound_instance(
    m: &TuringMachine,
    s: usize,
    step_cap: u64,
) -> Result<(ConstructionInstance, AcceptanceData), LowerBoundError> {
    let acc = acceptance_data(m, s, step_cap)?;
    let inst = build_instance(s, 2 * acc.steps as usize, false)?;
    Ok((inst, acc))
}

// ----- forced labeling -----

#[derive(Error, Debug)]
pub enum ForcingError {
    #[error("instance violates structure rules at node {0}")]
    NotClean(NodeId),
    #[error("directed pointer edges contain a cycle; outputs are not forced")]
    PointerCycle,
    #[error("node {node} is not forced: {allowed:?} outputs allowed")]
    NotForced { node: NodeId, allowed: Vec<String> },
}

/// Derive the unique verifier-accepted labeling of a clean instance.
///
/// The derivation is mechanical: (1) the directed pointer edges form a dag
/// and no rule is violated anywhere, so walking them in topological order
/// shows every pointer output is forced to `e:-`; (2) grid values are then
/// forced row by row through the same allowed-output sets the verifier uses,
/// asserting a singleton at every step. Together with a final verifier pass
/// this certifies that every accepted labeling agrees with the result.
pub fn forced_labeling(
    inst: &ConstructionInstance,
    m: &TuringMachine,
) -> Result<Vec<String>, ForcingError> {
    let g = &inst.graph;
    let doubly = inst.doubly;
    if let Some(v) = check_rules(g, doubly).first() {
        return Err(ForcingError::NotClean(v.node));
    }

    // topological order over directed pointer-capable edges
    let mut indeg = vec![0usize; g.n()];
    let mut fwd: Vec<Vec<NodeId>> = vec![Vec::new(); g.n()];
    for v in 0..g.n() {
        for (u, ty, dir) in g.neighbors(v) {
            if dir == RelDir::Out && EdgeKind::from_type(ty).is_some() {
                fwd[v].push(u);
                indeg[u] += 1;
            }
        }
    }
    let mut queue: Vec<NodeId> = (0..g.n()).filter(|&v| indeg[v] == 0).collect();
    let mut topo = Vec::new();
    while let Some(v) = queue.pop() {
        topo.push(v);
        for &u in &fwd[v] {
            indeg[u] -= 1;
            if indeg[u] == 0 {
                queue.push(u);
            }
        }
    }
    if topo.len() != g.n() {
        return Err(ForcingError::PointerCycle);
    }

    let mut labels: Vec<Option<String>> = vec![None; g.n()];
    // pointer outputs: with no violations anywhere and, inductively, no
    // incoming pointer, every pointer token except e:- is illegal
    for v in 0..g.n() {
        match parse_role(g.input(v)) {
            Role::Spine | Role::Expo { .. } => {
                let view = ball_with(g, v, 3, IdMode::IdFree, |_| None, |u, _| {
                    labels[u].clone()
                })
                .unwrap();
                debug_assert!(!violation_within_1(&view, view.center, doubly));
                debug_assert!(!incoming_err_present(m, &view, view.center));
                labels[v] = Some(OUT_ERR_NONE.to_string());
            }
            _ => {}
        }
    }

    // grid values row by row, left to right, each step a singleton
    for r in 1..=inst.height {
        for c in 1..=inst.s {
            let v = inst.grid_node(r, c);
            let view = ball_with(g, v, 3, IdMode::IdFree, |_| None, |u, _| labels[u].clone())
                .unwrap();
            if violation_within_1(&view, view.center, doubly) {
                return Err(ForcingError::NotClean(v));
            }
            let case = grid_case_from_view(m, &view, view.center);
            let allowed = grid_allowed(m, &case);
            if allowed.len() != 1 {
                return Err(ForcingError::NotForced {
                    node: v,
                    allowed: allowed.iter().map(|o| m_out_token(m, *o)).collect(),
                });
            }
            labels[v] = Some(m_out_token(m, allowed[0]));
        }
    }
    Ok(labels.into_iter().map(Option::unwrap).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::{simulate, verify_lcl, SimulationResult};
    use crate::turing::build_counter_machine;

    fn ids_for(g: &Graph) -> Vec<u64> {
        (0..g.n() as u64).collect()
    }

    fn solve(m: &TuringMachine, g: &Graph, doubly: bool) -> SimulationResult {
        simulate(&solver(m, doubly), g, &ids_for(g), 1).expect("solver terminates")
    }

    #[test]
    fn instance_sizes() {
        let inst = build_instance(4, 3, false).unwrap();
        assert_eq!(inst.count_spine(), 4);
        assert_eq!(inst.count_expo(), 15);
        assert_eq!(inst.count_grid(), 12);
        assert_eq!(inst.graph.n(), 31);
    }

    #[test]
    fn doubly_instance_sizes() {
        let inst = build_instance(3, 1, true).unwrap();
        // 2^3 - 1 first-tier nodes plus 2^4 - 1 second-tier nodes
        assert_eq!(inst.count_expo(), 7 + 15);
    }

    #[test]
    fn builder_rejects_short_spines() {
        assert_eq!(build_instance(2, 1, false).unwrap_err(), BuildError::SpineTooShort(2));
    }

    #[test]
    fn built_instances_are_rule_clean() {
        for (s, h, d) in [(3, 1, false), (3, 2, true), (4, 2, false), (4, 1, true)] {
            let inst = build_instance(s, h, d).unwrap();
            let violations = check_rules(&inst.graph, d);
            assert!(violations.is_empty(), "s={s} h={h} d={d}: {violations:?}");
        }
    }

    #[test]
    fn mutations_trip_the_checker() {
        let inst = build_instance(3, 2, false).unwrap();
        for kind in [
            Mutation::DropTreeEdge,
            Mutation::RecolorLayerNode,
            Mutation::BreakFace,
            Mutation::ShortenSpine,
        ] {
            let g = corrupt(&inst, kind).unwrap();
            let violations = check_rules(&g, false);
            assert!(!violations.is_empty(), "{kind:?} produced no violations");
        }
        // the broken face is reported against a face rule
        let g = corrupt(&inst, Mutation::BreakFace).unwrap();
        assert!(check_rules(&g, false)
            .iter()
            .any(|v| v.rule_id.starts_with("m-face") || v.rule_id == "m-conn"));
    }

    #[test]
    fn break_face_needs_two_rows() {
        let inst = build_instance(3, 1, false).unwrap();
        assert!(matches!(
            corrupt(&inst, Mutation::BreakFace),
            Err(MutationError::NotApplicable(Mutation::BreakFace, _))
        ));
    }

    #[test]
    fn forced_labeling_passes_the_verifier() {
        let m = build_counter_machine(2);
        let problem = lcl_problem_of(&m, false);
        let inst = build_instance(3, 8, false).unwrap();
        let labels = forced_labeling(&inst, &m).unwrap();
        let (ok, viol) = verify_lcl(&problem, &inst.graph, &labels).unwrap();
        assert!(ok, "violations at {viol:?}");
    }

    #[test]
    fn transcript_mutation_is_rejected() {
        let m = build_counter_machine(2);
        let problem = lcl_problem_of(&m, false);
        let inst = build_instance(3, 6, false).unwrap();
        let mut labels = forced_labeling(&inst, &m).unwrap();
        // overwrite one interior cell with a wrong symbol
        let v = inst.grid_node(3, 2);
        let was = labels[v].clone();
        let alt0 = cell_token(&m, m.sym_id("0").unwrap(), None);
        let alt1 = cell_token(&m, m.sym_id("1").unwrap(), None);
        labels[v] = if was == alt1 { alt0 } else { alt1 };
        let (ok, viol) = verify_lcl(&problem, &inst.graph, &labels).unwrap();
        assert!(!ok);
        // the rejection is local to the altered column
        assert!(viol.iter().all(|&x| {
            let d = inst.graph.bfs_dist(v)[x].unwrap();
            d <= 3
        }));
    }

    #[test]
    fn solver_handles_valid_instance() {
        let m = build_counter_machine(2);
        let problem = lcl_problem_of(&m, false);
        let inst = build_instance(3, 8, false).unwrap();
        let r = solve(&m, &inst.graph, false);
        let (ok, viol) = verify_lcl(&problem, &inst.graph, &r.outputs).unwrap();
        assert!(ok, "violations at {viol:?}");
        // the solver reproduces the forced labeling on clean instances
        let forced = forced_labeling(&inst, &m).unwrap();
        assert_eq!(r.outputs, forced);
    }

    #[test]
    fn solver_emits_error_chain_on_corrupted_tree() {
        let m = build_counter_machine(2);
        let problem = lcl_problem_of(&m, false);
        let inst = build_instance(3, 4, false).unwrap();
        let g = corrupt(&inst, Mutation::DropTreeEdge).unwrap();
        let r = solve(&m, &g, false);
        let (ok, viol) = verify_lcl(&problem, &g, &r.outputs).unwrap();
        assert!(ok, "violations at {viol:?}");
        // some pointer emitted, and the whole grid is excused
        assert!(r.outputs.iter().any(|o| o.starts_with("e:") && o != OUT_ERR_NONE));
        for row in 1..=inst.height {
            for col in 1..=inst.s {
                assert_eq!(r.outputs[inst.grid_node(row, col)], OUT_STAR);
            }
        }
    }

    #[test]
    fn solver_handles_all_mutations() {
        let m = build_counter_machine(2);
        let problem = lcl_problem_of(&m, false);
        let inst = build_instance(3, 2, false).unwrap();
        for kind in [
            Mutation::DropTreeEdge,
            Mutation::RecolorLayerNode,
            Mutation::BreakFace,
            Mutation::ShortenSpine,
        ] {
            let g = corrupt(&inst, kind).unwrap();
            let r = solve(&m, &g, false);
            let (ok, viol) = verify_lcl(&problem, &g, &r.outputs).unwrap();
            assert!(ok, "{kind:?}: violations at {viol:?}");
            if kind == Mutation::ShortenSpine {
                assert!(
                    r.outputs.iter().any(|o| o.starts_with("e:") && o != OUT_ERR_NONE),
                    "spine too short must surface as an error pointer"
                );
            }
        }
    }

    #[test]
    fn solver_survives_arbitrary_labeled_graphs() {
        use crate::enumerate::{random_labeled_graph, SplitMix};
        let m = build_counter_machine(2);
        let problem = lcl_problem_of(&m, false);
        let mut rng = SplitMix::new(5);
        let node_tokens: Vec<String> = sigma_in();
        let node_refs: Vec<&str> = node_tokens.iter().map(String::as_str).collect();
        let edge_tokens = [ET_SPINE, ET_CONN, ET_TREE, ET_LAYER, ET_VERT, ET_HORIZ, ET_GLUE];
        for i in 0..15 {
            let n = 4 + rng.below(30);
            let g = random_labeled_graph(&mut rng, n, 5, &node_refs, &edge_tokens);
            let r = solve(&m, &g, false);
            let (ok, viol) = verify_lcl(&problem, &g, &r.outputs).unwrap();
            assert!(ok, "random graph {i}: violations at {viol:?}");
        }
    }

    #[test]
    fn lower_bound_instance_counts() {
        let m = build_counter_machine(2);
        let (inst, acc) = build_lower_bound_instance(&m, 4, 100_000).unwrap();
        let t = acc.steps as usize;
        assert_eq!(inst.height, 2 * t);
        assert_eq!(inst.graph.n(), 4 + (1 << 4) - 1 + 4 * 2 * t);
    }

    #[test]
    fn lower_bound_pair_is_indistinguishable_and_forced_apart() {
        use crate::local::indistinguishable;
        let m = build_counter_machine(2);
        let (inst, acc) = build_lower_bound_instance(&m, 3, 100_000).unwrap();
        let t = acc.steps as usize;
        let content = inst.grid_node(acc.accept_row - 1, acc.accept_col);
        let star = inst.grid_node(acc.accept_row, acc.accept_col);
        assert!(indistinguishable(&inst.graph, content, star, t - 1));
        let labels = forced_labeling(&inst, &m).unwrap();
        assert_eq!(labels[star], OUT_STAR);
        assert_ne!(labels[content], OUT_STAR);
    }

    #[test]
    fn solver_and_verifier_agree_on_doubly_instances() {
        let m = build_counter_machine(2);
        let problem = lcl_problem_of(&m, true);
        let inst = build_instance(3, 2, true).unwrap();
        assert!(check_rules(&inst.graph, true).is_empty());
        let r = solve(&m, &inst.graph, true);
        let (ok, viol) = verify_lcl(&problem, &inst.graph, &r.outputs).unwrap();
        assert!(ok, "violations at {viol:?}");
        // a singly-mode checker flags the second tier
        assert!(!check_rules(&inst.graph, false).is_empty());
    }
}
