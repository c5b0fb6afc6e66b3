//! Landscape analysis for minor-closed graph classes and the LCL problems
//! that separate them.
//!
//! The crate has three layers:
//!
//! * [`graph`] and [`minor`]: finite labeled graphs, rooted trees, radius-d
//!   views, and exhaustive minor oracles used as ground truth everywhere else.
//! * [`width`], [`classify`], [`planar`]: path decompositions of the
//!   hard-instance trees, layer decompositions with growth bounds, and the
//!   forbidden-minor landscape classifier.
//! * [`turing`], [`local`], [`construct`]: linear-space-bounded Turing
//!   machines, a synchronous LOCAL-model simulator with an LCL verifier, and
//!   the grid/tree construction that turns a machine into an LCL problem
//!   together with its solving algorithm and lower-bound certificates.
//!
//! Everything is deterministic given its inputs. Node-level loops run on
//! rayon when the `parallel` feature is enabled (the default); disabling the
//! feature or calling [`par::force_sequential`] falls back to plain
//! iterators.

pub mod classify;
pub mod construct;
pub mod enumerate;
pub mod graph;
pub mod local;
pub mod minor;
pub mod par;
pub mod planar;
pub mod turing;
pub mod width;

pub use classify::{classify, forest_min_level, rooted_level, tree_min_level, Bucket, ClassVerdict};
pub use construct::{
    build_instance, build_lower_bound_instance, check_rules, corrupt, forced_labeling,
    lcl_problem_of, solver, ConstructionInstance, Mutation, RuleViolation,
};
pub use graph::{
    ball, ball_isomorphic, generate_t, Ball, Graph, GraphBuilder, IdMode, NodeId, Orientation,
    RootedTree,
};
pub use local::{indistinguishable, simulate, verify_lcl, LclProblem, LocalAlgorithm, SimulationResult};
pub use minor::{brute_force_minor, brute_force_rooted_minor};
pub use planar::is_planar;
pub use turing::{
    build_counter_machine, build_division_machine, compose, time_profile, TimeProfile,
    TuringMachine,
};
pub use width::{
    growth_profile, is_k_c_limited, k_bound, layer_decomposition, path_decomposition_of_t,
    validate_path_decomposition, GrowthReport, LayerDecomposition, PathDecomposition,
};
