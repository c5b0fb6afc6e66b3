//! Synchronous LOCAL-model execution, LCL problem representation with its
//! verifier, and id-free view indistinguishability.
//!
//! The engine uses ball-collection semantics: in round t every undecided node
//! evaluates its decision function on its radius-t view. Decided outputs of
//! other nodes become visible only once they have had time to propagate
//! (decision round plus distance), so an algorithm sees exactly what t rounds
//! of full-information message passing would deliver.

use crate::graph::{ball_isomorphic, ball_with, Ball, Graph, IdMode, NodeId};
use crate::par;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use thiserror::Error;

/// An LCL problem: degree bound, checking radius, label sets, and the allowed
/// predicate over output-decorated id-free views.
#[derive(Clone)]
pub struct LclProblem {
    pub delta: usize,
    pub radius: usize,
    pub sigma_in: Vec<String>,
    pub sigma_out: Vec<String>,
    allowed: Arc<dyn Fn(&Ball) -> bool + Send + Sync>,
}

impl LclProblem {
    pub fn new(
        delta: usize,
        radius: usize,
        sigma_in: Vec<String>,
        sigma_out: Vec<String>,
        allowed: impl Fn(&Ball) -> bool + Send + Sync + 'static,
    ) -> Self {
        LclProblem { delta, radius, sigma_in, sigma_out, allowed: Arc::new(allowed) }
    }

    /// Membership query for one output-decorated view.
    pub fn allows(&self, view: &Ball) -> bool {
        (self.allowed)(view)
    }
}

impl std::fmt::Debug for LclProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LclProblem")
            .field("delta", &self.delta)
            .field("radius", &self.radius)
            .field("sigma_in", &self.sigma_in.len())
            .field("sigma_out", &self.sigma_out.len())
            .finish()
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum VerifyError {
    #[error("labeling has {got} entries for {want} nodes")]
    WrongLength { got: usize, want: usize },
    #[error("node {node} carries label {label:?} outside the output alphabet")]
    InvalidLabeling { node: NodeId, label: String },
}

/// Check every center against the allowed predicate. Returns overall success
/// plus the list of rejecting centers.
pub fn verify_lcl(
    p: &LclProblem,
    g: &Graph,
    out: &[String],
) -> Result<(bool, Vec<NodeId>), VerifyError> {
    if out.len() != g.n() {
        return Err(VerifyError::WrongLength { got: out.len(), want: g.n() });
    }
    for (v, label) in out.iter().enumerate() {
        if !p.sigma_out.iter().any(|l| l == label) {
            return Err(VerifyError::InvalidLabeling { node: v, label: label.clone() });
        }
    }
    let ok: Vec<bool> = par::map_indexed(g.n(), |v| {
        let view = ball_with(g, v, p.radius, IdMode::IdFree, |_| None, |u, _| {
            Some(out[u].clone())
        })
        .expect("center is a graph node");
        p.allows(&view)
    });
    let violations: Vec<NodeId> = (0..g.n()).filter(|&v| !ok[v]).collect();
    Ok((violations.is_empty(), violations))
}

/// What a node does after inspecting its current view.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Output(String),
    Wait,
}

/// Everything a node sees in one round: its radius-t view (with identifiers
/// and causally visible outputs), the round number, the graph size, and its
/// private random tape.
pub struct DecideContext<'a> {
    pub view: &'a Ball,
    pub round: usize,
    pub n: usize,
    pub tape: &'a [u64],
}

/// A LOCAL algorithm as a decision function over views. The engine only ever
/// hands the function its radius-t ball, so round-t decisions cannot depend
/// on anything farther away.
#[derive(Clone)]
pub struct LocalAlgorithm {
    pub delta: usize,
    pub max_rounds: Option<usize>,
    decide: Arc<dyn Fn(&DecideContext) -> Decision + Send + Sync>,
}

impl LocalAlgorithm {
    pub fn new(
        delta: usize,
        max_rounds: Option<usize>,
        decide: impl Fn(&DecideContext) -> Decision + Send + Sync + 'static,
    ) -> Self {
        LocalAlgorithm { delta, max_rounds, decide: Arc::new(decide) }
    }

    pub fn decide(&self, ctx: &DecideContext) -> Decision {
        (self.decide)(ctx)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationResult {
    pub outputs: Vec<String>,
    /// Round at which each node finalized.
    pub rounds_per_node: Vec<usize>,
    pub max_round: usize,
}

#[derive(Error, Debug)]
pub enum SimError {
    #[error("expected {want} identifiers, got {got}")]
    WrongIdCount { got: usize, want: usize },
    #[error("identifiers are not injective (id {id} repeats)")]
    DuplicateId { id: u64 },
    #[error("identifier {id} at node {node} exceeds the id-space bound {bound}")]
    IdOutOfRange { node: NodeId, id: u64, bound: u64 },
    #[error("nodes {undecided:?} undecided after {rounds} rounds")]
    NonTermination { rounds: usize, undecided: Vec<NodeId>, partial: Vec<Option<String>> },
}

/// Exponent of the polynomial id space: identifiers must be below n^c.
pub const DEFAULT_ID_EXPONENT: u32 = 2;

const TAPE_WORDS: usize = 32;

pub fn simulate(
    alg: &LocalAlgorithm,
    g: &Graph,
    ids: &[u64],
    seed: u64,
) -> Result<SimulationResult, SimError> {
    simulate_with_id_exponent(alg, g, ids, seed, DEFAULT_ID_EXPONENT)
}

/// Deterministic synchronous execution: identical inputs give identical
/// results, bit for bit. Per-round node evaluations are independent and run
/// in parallel; results merge in node order.
pub fn simulate_with_id_exponent(
    alg: &LocalAlgorithm,
    g: &Graph,
    ids: &[u64],
    seed: u64,
    id_exponent: u32,
) -> Result<SimulationResult, SimError> {
    let n = g.n();
    if ids.len() != n {
        return Err(SimError::WrongIdCount { got: ids.len(), want: n });
    }
    let bound = (n.max(2) as u64).saturating_pow(id_exponent);
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(SimError::DuplicateId { id: w[0] });
        }
    }
    if let Some(v) = (0..n).find(|&v| ids[v] >= bound) {
        return Err(SimError::IdOutOfRange { node: v, id: ids[v], bound });
    }

    // fixed private tape per node, derived from the seed and the node index
    let tapes: Vec<Vec<u64>> = (0..n)
        .map(|v| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (v as u64).wrapping_mul(0x9e3779b97f4a7c15));
            (0..TAPE_WORDS).map(|_| rng.next_u64()).collect()
        })
        .collect();

    let cap = alg.max_rounds.unwrap_or(2 * n + 16);
    let mut decided: Vec<Option<(String, usize)>> = vec![None; n];
    let mut remaining: Vec<NodeId> = (0..n).collect();
    let mut max_round = 0;
    for t in 0..=cap {
        if remaining.is_empty() {
            break;
        }
        let decisions: Vec<(NodeId, Decision)> = par::map_slice(&remaining, |&v| {
            let view = ball_with(g, v, t, IdMode::WithIds, |u| Some(ids[u]), |u, dist| {
                decided[u]
                    .as_ref()
                    .filter(|(_, r)| r + dist <= t)
                    .map(|(s, _)| s.clone())
            })
            .expect("simulating a graph node");
            let ctx = DecideContext { view: &view, round: t, n, tape: &tapes[v] };
            (v, alg.decide(&ctx))
        });
        for (v, d) in decisions {
            if let Decision::Output(label) = d {
                decided[v] = Some((label, t));
                max_round = max_round.max(t);
            }
        }
        remaining.retain(|&v| decided[v].is_none());
    }
    if !remaining.is_empty() {
        return Err(SimError::NonTermination {
            rounds: cap,
            undecided: remaining,
            partial: decided.into_iter().map(|d| d.map(|(s, _)| s)).collect(),
        });
    }
    let mut outputs = Vec::with_capacity(n);
    let mut rounds = Vec::with_capacity(n);
    for d in decided {
        let (s, r) = d.unwrap();
        outputs.push(s);
        rounds.push(r);
    }
    Ok(SimulationResult { outputs, rounds_per_node: rounds, max_round })
}

/// Serialize a labeling as `node <id> <label>` lines followed by
/// `round <id> <t>` lines.
pub fn result_to_text(r: &SimulationResult) -> String {
    let mut s = String::new();
    for (v, label) in r.outputs.iter().enumerate() {
        s.push_str(&format!("node {v} {label}\n"));
    }
    for (v, t) in r.rounds_per_node.iter().enumerate() {
        s.push_str(&format!("round {v} {t}\n"));
    }
    s
}

/// True iff the id-free radius-d views at `u` and `v` are isomorphic,
/// including inputs, edge types, and orientations.
pub fn indistinguishable(g: &Graph, u: NodeId, v: NodeId, d: usize) -> bool {
    let a = ball_with(g, u, d, IdMode::IdFree, |_| None, |_, _| None).expect("node in graph");
    let b = ball_with(g, v, d, IdMode::IdFree, |_| None, |_, _| None).expect("node in graph");
    ball_isomorphic(&a, &b).expect("same id mode")
}
