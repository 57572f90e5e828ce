//! Chromatic simplicial models of multi-agent knowledge.
//!
//! The crate builds chromatic simplicial complexes whose facets are global
//! states and whose vertices are agents' local states, evolves them under
//! communication-graph models (unreliable broadcast, immediate snapshot,
//! test-and-set), model-checks epistemic formulas (individual, common,
//! distributed, and common distributed knowledge), and decides distributed
//! task solvability via decision-map search and logical obstructions.

pub mod algo;
pub mod comm;
pub mod complex;
pub mod dot;
pub mod error;
pub mod frame;
pub mod logic;
pub mod muddy;
pub mod state;
pub mod task;

pub use algo::{
    all_pairs, courteous_map, knowledge_threshold_map, phi0_formula, phi_formula, psi_formula,
    tas_loser_qualifies, tas_two_round_map,
};
pub use comm::{iterate_rounds, one_round, partial_round, CommGraph, CommModel, ModelKind};
pub use complex::{ChromaticComplex, Vertex};
pub use dot::export_dual_dot;
pub use error::{Error, Result};
pub use frame::EpistemicFrame;
pub use logic::{
    eval_formula, is_positive, parse_formula, public_announce, Formula, ModelChecker,
};
pub use state::{AgentId, LocalState, Value};
pub use task::{
    binary_input_complex, check_obstruction, make_task, search_decision_map,
    validate_decision_map, DecisionMap, ObstructionReport, ObstructionVerdict, SearchOutcome,
    Task, TaskKind, ValidationReport, Violation, ViolationReason,
};
